#include "curvy/graphrep.hpp"

#include <algorithm>

#include "curvy/error.hpp"

namespace curvy::graphrep {

std::vector<int> CSGraph::degrees() const {
  std::vector<int> out(node_count(), 0);
  for (Eigen::Index i = 0; i < piece_adj.rows(); ++i) {
    for (Eigen::Index j = 0; j < piece_adj.cols(); ++j) {
      if (i != j && piece_adj(i, j) != 0.0) ++out[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

CSGraph build_graph(const splitfit::CrossSectionSet& set) {
  set.validate();
  const std::size_t m = set.m();
  const std::size_t k = set.k();
  const auto n = static_cast<Eigen::Index>(m * k);

  CSGraph g;
  g.node_features.resize(n, kFeatureDim);
  g.piece_adj = RowMatrix::Zero(n, n);
  g.section_membership.resize(static_cast<std::size_t>(n));
  g.section_adj = RowMatrix::Ones(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));

  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto node = static_cast<Eigen::Index>(s * k + j);
      const auto& coeffs = set.sections[s].pieces[j].coeffs;
      for (int r = 0; r < splitfit::kCoeffRows; ++r) {
        for (int c = 0; c < 3; ++c) g.node_features(node, r * 3 + c) = coeffs(r, c);
      }
      g.section_membership[static_cast<std::size_t>(node)] = static_cast<int>(s);
      const auto next = static_cast<Eigen::Index>(s * k + (j + 1) % k);
      g.piece_adj(node, node) = 1.0;
      g.piece_adj(node, next) = 1.0;
      g.piece_adj(next, node) = 1.0;
    }
  }
  return g;
}

std::vector<std::size_t> permutation_node_order(const CSGraph& g,
                                                const std::vector<std::size_t>& section_perm,
                                                const std::vector<std::size_t>& shifts) {
  const std::size_t m = g.section_count();
  if (section_perm.size() != m || shifts.size() != m) {
    throw DataError("permutation and shift lists must have one entry per section");
  }
  std::vector<std::size_t> seen(section_perm);
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < m; ++i) {
    if (seen[i] != i) throw DataError("section_perm is not a permutation");
  }

  // Nodes of each old section, in order.
  std::vector<std::vector<std::size_t>> members(m);
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    members[static_cast<std::size_t>(g.section_membership[node])].push_back(node);
  }
  std::vector<std::size_t> order;
  order.reserve(g.node_count());
  for (std::size_t s = 0; s < m; ++s) {
    const auto& src = members[section_perm[s]];
    const std::size_t k = src.size();
    for (std::size_t j = 0; j < k; ++j) order.push_back(src[(j + shifts[s]) % k]);
  }
  return order;
}

RowMatrix permute_rows(const RowMatrix& rows, const std::vector<std::size_t>& order) {
  if (static_cast<std::size_t>(rows.rows()) != order.size()) {
    throw DataError("row count does not match node order");
  }
  RowMatrix out(rows.rows(), rows.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(order[i]));
  }
  return out;
}

CSGraph permute_graph(const CSGraph& g, const std::vector<std::size_t>& section_perm,
                      const std::vector<std::size_t>& shifts) {
  const auto order = permutation_node_order(g, section_perm, shifts);
  const auto n = static_cast<Eigen::Index>(order.size());

  std::vector<std::size_t> new_section_of_old(section_perm.size());
  for (std::size_t s = 0; s < section_perm.size(); ++s) new_section_of_old[section_perm[s]] = s;

  CSGraph out;
  out.node_features = permute_rows(g.node_features, order);
  out.piece_adj.resize(n, n);
  out.section_membership.resize(order.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto oi = static_cast<Eigen::Index>(order[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      out.piece_adj(i, j) = g.piece_adj(oi, static_cast<Eigen::Index>(order[static_cast<std::size_t>(j)]));
    }
    out.section_membership[static_cast<std::size_t>(i)] = static_cast<int>(
        new_section_of_old[static_cast<std::size_t>(g.section_membership[static_cast<std::size_t>(oi)])]);
  }
  const auto m = static_cast<Eigen::Index>(section_perm.size());
  out.section_adj.resize(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      out.section_adj(a, b) = g.section_adj(static_cast<Eigen::Index>(section_perm[static_cast<std::size_t>(a)]),
                                            static_cast<Eigen::Index>(section_perm[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

}  // namespace curvy::graphrep
