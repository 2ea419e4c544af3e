#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "curvy/nn/tensor.hpp"

namespace curvy::nn {

// Elementwise binary ops broadcast any dimension of size 1 (row vectors,
// column vectors and 1x1 scalars).
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, const Tensor& b);
Tensor operator/(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a);
Tensor operator+(const Tensor& a, double s);
Tensor operator*(const Tensor& a, double s);
inline Tensor operator*(double s, const Tensor& a) { return a * s; }
inline Tensor operator-(const Tensor& a, double s) { return a + (-s); }
inline Tensor operator+(double s, const Tensor& a) { return a + s; }
Tensor operator-(double s, const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);
/// Constant left operand, e.g. a normalized adjacency.
Tensor matmul(const Matrix& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor sigmoid(const Tensor& x);
/// log(1 + exp(x)), stable for large |x|.
Tensor softplus(const Tensor& x);
Tensor log(const Tensor& x);
Tensor exp(const Tensor& x);
/// Gradient is defined as 0 where the result is 0.
Tensor sqrt(const Tensor& x);
Tensor square(const Tensor& x);

Tensor softmax_rows(const Tensor& x);
/// Row-wise softmax over entries where mask != 0; other entries are 0.
/// Throws DataError for a row with an empty mask.
Tensor masked_softmax_rows(const Tensor& x, const Matrix& mask);

Tensor sum(const Tensor& x);   // 1x1
Tensor mean(const Tensor& x);  // 1x1
Tensor col_sum(const Tensor& x);   // 1 x cols
Tensor col_mean(const Tensor& x);  // 1 x cols
/// Column-wise max over rows (max-pool). The first maximal row wins ties.
Tensor col_max(const Tensor& x);
/// Mean of the rows sharing a segment id; ids in [0, count).
Tensor segment_mean(const Tensor& x, const std::vector<int>& segment, std::size_t count);

/// mean((a - b)^2)
Tensor mse(const Tensor& a, const Tensor& b);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
/// Row-major reinterpretation.
Tensor reshape(const Tensor& x, std::size_t rows, std::size_t cols);

/// Chamfer distance between two n x 3 point sets (squared distances, sum of
/// the two directed means), differentiable in both arguments.
Tensor chamfer_loss(const Tensor& p, const Tensor& q);

/// Matrix of N(0, scale^2) draws.
Matrix gaussian_init(std::size_t rows, std::size_t cols, double scale, std::mt19937_64& rng);
Matrix gaussian_init(std::size_t rows, std::size_t cols, double scale, std::uint64_t seed);

}  // namespace curvy::nn
