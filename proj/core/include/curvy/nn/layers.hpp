#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "curvy/nn/ops.hpp"
#include "curvy/nn/tensor.hpp"

namespace curvy::nn {

/// Ordered (name, tensor) pairs; the order defines archive layout.
using NamedParameters = std::vector<std::pair<std::string, Tensor>>;

/// Glorot-style N(0, 2/(in+out)) initialization.
Matrix glorot(std::size_t in, std::size_t out, std::mt19937_64& rng);

struct DenseLayer {
  Tensor W;  // in x out
  Tensor b;  // 1 x out

  static DenseLayer init(std::size_t in, std::size_t out, std::mt19937_64& rng);
  void collect(const std::string& prefix, NamedParameters& out) const;
};

/// X W + b
Tensor dense_forward(const DenseLayer& layer, const Tensor& x);

// ---------------------------------------------------------------------------
// Graph layers. Adjacency matrices are dense 0/1 constants.

/// D^-1/2 (A + I) D^-1/2 where existing self-loops are not added twice.
/// Throws DataError for asymmetric input.
Matrix gcn_normalized_adjacency(const Matrix& adjacency);

/// Row i averages the neighbours of i (self-loops excluded); isolated rows are zero.
Matrix neighbor_mean_matrix(const Matrix& adjacency);

/// Â X W
Tensor gcn_forward(const Tensor& x, const Matrix& adjacency, const Tensor& w);

/// X W_self + mean_{j in N(i)} x_j W_neigh
Tensor sage_forward(const Tensor& x, const Matrix& adjacency, const Tensor& w_self,
                    const Tensor& w_neigh);

struct SageLayer {
  Tensor w_self;
  Tensor w_neigh;
  Tensor bias;  // 1 x out

  static SageLayer init(std::size_t in, std::size_t out, std::mt19937_64& rng);
  Tensor forward(const Tensor& x, const Matrix& adjacency) const;
  void collect(const std::string& prefix, NamedParameters& out) const;
};

struct GATLayer {
  Tensor W;  // in x out
  Tensor a;  // 2*out x 1: source half then neighbour half
  double slope = 0.2;

  static GATLayer init(std::size_t in, std::size_t out, std::mt19937_64& rng);
  void collect(const std::string& prefix, NamedParameters& out) const;
};

/// e_ij = LeakyReLU(a^T [W x_i || W x_j]) over j with A_ij != 0, alpha = row
/// softmax, out_i = sum_j alpha_ij W x_j. `attention`, when given, receives alpha.
Tensor gat_forward(const GATLayer& layer, const Tensor& x, const Matrix& adjacency,
                   Matrix* attention = nullptr);

/// Soft group assignment S = softmax(X W_assign); each group's rows X_g =
/// diag(S_g) X are standardized per column with S_g as weights over rows
/// holding mass > 1e-8; output X + lambda * sum_g standardized(X_g).
Tensor diffnorm_forward(const Tensor& x, const Tensor& w_assign, const Tensor& lambda);
Tensor diffnorm_forward(const Tensor& x, const Tensor& w_assign, double lambda);

struct DiffNormLayer {
  Tensor w_assign;  // features x groups
  Tensor lambda;    // 1x1, learnable

  static DiffNormLayer init(std::size_t features, std::size_t groups, double lambda,
                            std::mt19937_64& rng);
  Tensor forward(const Tensor& x) const { return diffnorm_forward(x, w_assign, lambda); }
  void collect(const std::string& prefix, NamedParameters& out) const;
};

}  // namespace curvy::nn
