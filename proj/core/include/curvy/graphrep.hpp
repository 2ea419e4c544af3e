#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "curvy/splitfit.hpp"

namespace curvy::graphrep {

inline constexpr int kFeatureDim = splitfit::kCoeffRows * 3;  // 18

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Graph over the pieces of a cross-section set. Nodes are laid out
/// section-major, pieces in cyclic order; each feature row is the flattened
/// coefficient matrix (t^0 x, t^0 y, t^0 z, t^1 x, ...).
struct CSGraph {
  RowMatrix node_features;              // (m*k) x 18
  RowMatrix piece_adj;                  // A_p: rings within sections, self-loops
  std::vector<int> section_membership;  // node -> section id
  RowMatrix section_adj;                // A_c: m x m all-ones

  std::size_t node_count() const { return section_membership.size(); }
  std::size_t section_count() const { return static_cast<std::size_t>(section_adj.rows()); }
  /// Neighbour count of each node in A_p, excluding the self-loop.
  std::vector<int> degrees() const;
};

CSGraph build_graph(const splitfit::CrossSectionSet& set);

/// new node i corresponds to old node order[i] under the relabeling.
std::vector<std::size_t> permutation_node_order(const CSGraph& g,
                                                const std::vector<std::size_t>& section_perm,
                                                const std::vector<std::size_t>& shifts);

/// Reorders sections (new section s is old section section_perm[s]) and
/// rotates the pieces of each new section s by shifts[s]. Adjacency and
/// features are relabeled consistently.
CSGraph permute_graph(const CSGraph& g, const std::vector<std::size_t>& section_perm,
                      const std::vector<std::size_t>& shifts);

/// Applies a node order from permutation_node_order to an arbitrary per-node matrix.
RowMatrix permute_rows(const RowMatrix& rows, const std::vector<std::size_t>& order);

}  // namespace curvy::graphrep
