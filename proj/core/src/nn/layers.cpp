#include "curvy/nn/layers.hpp"

#include <cmath>

#include "curvy/error.hpp"

namespace curvy::nn {

Matrix glorot(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return gaussian_init(in, out, std::sqrt(2.0 / static_cast<double>(in + out)), rng);
}

DenseLayer DenseLayer::init(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return DenseLayer{Tensor::parameter(glorot(in, out, rng)), Tensor::parameter(Matrix(1, out))};
}

void DenseLayer::collect(const std::string& prefix, NamedParameters& out) const {
  out.emplace_back(prefix + ".W", W);
  out.emplace_back(prefix + ".b", b);
}

Tensor dense_forward(const DenseLayer& layer, const Tensor& x) {
  if (x.cols() != layer.W.rows()) {
    throw DataError("dense layer expects " + std::to_string(layer.W.rows()) + " input features, got " +
                    std::to_string(x.cols()));
  }
  return matmul(x, layer.W) + layer.b;
}

// ---------------------------------------------------------------------------

namespace {

void require_square(const Matrix& a, std::size_t n, const char* what) {
  if (a.rows() != n || a.cols() != n) {
    throw DataError(std::string(what) + ": adjacency must be " + std::to_string(n) + " x " +
                    std::to_string(n));
  }
}

}  // namespace

Matrix gcn_normalized_adjacency(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  require_square(adjacency, n, "gcn");
  Matrix a = adjacency;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (a(i, j) != a(j, i)) throw DataError("gcn adjacency must be symmetric");
    }
    a(i, i) = 1.0;
  }
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) degree += a(i, j);
    if (!(degree > 0.0)) throw DataError("gcn: node " + std::to_string(i) + " has zero degree");
    scale[i] = 1.0 / std::sqrt(degree);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) *= scale[i] * scale[j];
  }
  return a;
}

Matrix neighbor_mean_matrix(const Matrix& adjacency) {
  const std::size_t n = adjacency.rows();
  require_square(adjacency, n, "sage");
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double count = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && adjacency(i, j) != 0.0) count += 1.0;
    }
    if (count == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && adjacency(i, j) != 0.0) m(i, j) = 1.0 / count;
    }
  }
  return m;
}

Tensor gcn_forward(const Tensor& x, const Matrix& adjacency, const Tensor& w) {
  require_square(adjacency, x.rows(), "gcn");
  return matmul(gcn_normalized_adjacency(adjacency), matmul(x, w));
}

Tensor sage_forward(const Tensor& x, const Matrix& adjacency, const Tensor& w_self,
                    const Tensor& w_neigh) {
  require_square(adjacency, x.rows(), "sage");
  if (w_self.rows() != x.cols() || w_neigh.rows() != x.cols() || w_self.cols() != w_neigh.cols()) {
    throw DataError("sage weight shapes do not match the input");
  }
  return matmul(x, w_self) + matmul(neighbor_mean_matrix(adjacency), matmul(x, w_neigh));
}

SageLayer SageLayer::init(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  SageLayer layer;
  layer.w_self = Tensor::parameter(glorot(in, out, rng));
  layer.w_neigh = Tensor::parameter(glorot(in, out, rng));
  layer.bias = Tensor::parameter(Matrix(1, out));
  return layer;
}

Tensor SageLayer::forward(const Tensor& x, const Matrix& adjacency) const {
  return sage_forward(x, adjacency, w_self, w_neigh) + bias;
}

void SageLayer::collect(const std::string& prefix, NamedParameters& out) const {
  out.emplace_back(prefix + ".W_self", w_self);
  out.emplace_back(prefix + ".W_neigh", w_neigh);
  out.emplace_back(prefix + ".b", bias);
}

GATLayer GATLayer::init(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  GATLayer layer;
  layer.W = Tensor::parameter(glorot(in, out, rng));
  layer.a = Tensor::parameter(glorot(2 * out, 1, rng));
  return layer;
}

void GATLayer::collect(const std::string& prefix, NamedParameters& out) const {
  out.emplace_back(prefix + ".W", W);
  out.emplace_back(prefix + ".a", a);
}

Tensor gat_forward(const GATLayer& layer, const Tensor& x, const Matrix& adjacency, Matrix* attention) {
  require_square(adjacency, x.rows(), "gat");
  const std::size_t out = layer.W.cols();
  if (layer.a.rows() != 2 * out || layer.a.cols() != 1) throw DataError("gat attention vector must be 2*out x 1");
  const Tensor h = matmul(x, layer.W);
  const Tensor source = matmul(h, slice_rows(layer.a, 0, out));         // n x 1
  const Tensor neighbour = matmul(h, slice_rows(layer.a, out, out));    // n x 1
  const Tensor logits = leaky_relu(source + transpose(neighbour), layer.slope);
  const Tensor alpha = masked_softmax_rows(logits, adjacency);
  if (attention) *attention = alpha.value();
  return matmul(alpha, h);
}

Tensor diffnorm_forward(const Tensor& x, const Tensor& w_assign, const Tensor& lambda) {
  if (w_assign.rows() != x.cols()) throw DataError("diffnorm assignment weights do not match features");
  const Tensor assign = softmax_rows(matmul(x, w_assign));
  Tensor total;
  for (std::size_t g = 0; g < w_assign.cols(); ++g) {
    const Tensor weight = slice_cols(assign, g, 1);  // n x 1
    Matrix mask(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) mask(i, 0) = weight.value()(i, 0) > 1e-8 ? 1.0 : 0.0;
    const Tensor mask_t = Tensor::constant(mask);
    const Tensor w = weight * mask_t;
    const Tensor mass = sum(w);
    const Tensor group = x * weight;
    const Tensor mu = matmul(transpose(w), group) / mass;  // 1 x f
    const Tensor centered = (group - mu) * mask_t;
    const Tensor var = matmul(transpose(w), square(centered)) / mass;
    const Tensor standardized = centered / (sqrt(var) + 1e-5);
    total = total.defined() ? total + standardized : standardized;
  }
  return x + lambda * total;
}

Tensor diffnorm_forward(const Tensor& x, const Tensor& w_assign, double lambda) {
  return diffnorm_forward(x, w_assign, Tensor::constant(Matrix(1, 1, lambda)));
}

DiffNormLayer DiffNormLayer::init(std::size_t features, std::size_t groups, double lambda,
                                  std::mt19937_64& rng) {
  return DiffNormLayer{Tensor::parameter(glorot(features, groups, rng)),
                       Tensor::parameter(Matrix(1, 1, lambda))};
}

void DiffNormLayer::collect(const std::string& prefix, NamedParameters& out) const {
  out.emplace_back(prefix + ".W_assign", w_assign);
  out.emplace_back(prefix + ".lambda", lambda);
}

}  // namespace curvy::nn
