#include "curvy/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "curvy/error.hpp"

namespace curvy::nn {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DataError("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DataError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  const std::size_t inner = a.cols();
  const std::size_t width = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out = c.row(i);
    const double* ar = a.row(i);
    for (std::size_t k = 0; k < inner; ++k) {
      const double s = ar[k];
      const double* br = b.row(k);
      for (std::size_t j = 0; j < width; ++j) out[j] += s * br[j];
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DataError("matmul_nt: inner dimensions differ");
  return matmul(a, transpose(b));
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DataError("matmul_tn: inner dimensions differ");
  Matrix c(a.cols(), b.cols());
  const std::size_t width = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* ar = a.row(r);
    const double* br = b.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double s = ar[i];
      if (s == 0.0) continue;
      double* out = c.row(i);
      for (std::size_t j = 0; j < width; ++j) out[j] += s * br[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

void Node::accumulate(const Matrix& g) {
  if (grad.size() == 0) {
    grad = g;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
}

Tensor Tensor::constant(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Tensor(std::move(node));
}

Matrix Tensor::grad() const {
  if (node_->grad.size() == 0) return Matrix(rows(), cols());
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad = Matrix();
}

double Tensor::item() const {
  if (node_->value.size() != 1) throw DataError("item() needs a 1x1 tensor");
  return node_->value[0];
}

Tensor Tensor::make(Matrix value, std::vector<Tensor> inputs, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  for (const Tensor& in : inputs) {
    if (in.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->parents.reserve(inputs.size());
    for (const Tensor& in : inputs) node->parents.push_back(in.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void backward(const Tensor& scalar) {
  if (scalar.value().size() != 1) throw DataError("backward needs a scalar tensor");
  if (!scalar.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{scalar.node().get(), 0}};
  visited.insert(scalar.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  scalar.node()->accumulate(Matrix(1, 1, 1.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && node->grad.size() != 0) node->backward(*node);
  }
  // Interior gradients are not needed after the pass.
  for (Node* node : order) {
    if (node->backward) node->grad = Matrix();
  }
}

Tensor detach(const Tensor& t) { return Tensor::constant(t.value()); }

}  // namespace curvy::nn
