#include "curvy/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "curvy/error.hpp"
#include "curvy/metrics.hpp"

namespace curvy::nn {

namespace {

enum class BinOp { kAdd, kSub, kMul, kDiv };

std::size_t broadcast_dim(std::size_t a, std::size_t b, const char* what) {
  if (a == b) return a;
  if (a == 1) return b;
  if (b == 1) return a;
  throw DataError(std::string("shape mismatch in ") + what + ": " + std::to_string(a) + " vs " +
                  std::to_string(b));
}

const char* op_name(BinOp op) {
  switch (op) {
    case BinOp::kAdd: return "add";
    case BinOp::kSub: return "sub";
    case BinOp::kMul: return "mul";
    case BinOp::kDiv: return "div";
  }
  return "binary op";
}

Tensor binary(const Tensor& a, const Tensor& b, BinOp op) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const std::size_t rows = broadcast_dim(av.rows(), bv.rows(), op_name(op));
  const std::size_t cols = broadcast_dim(av.cols(), bv.cols(), op_name(op));
  Matrix out(rows, cols);
  const bool ar = av.rows() == 1, ac = av.cols() == 1, br = bv.rows() == 1, bc = bv.cols() == 1;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double x = av(ar ? 0 : i, ac ? 0 : j);
      const double y = bv(br ? 0 : i, bc ? 0 : j);
      switch (op) {
        case BinOp::kAdd: out(i, j) = x + y; break;
        case BinOp::kSub: out(i, j) = x - y; break;
        case BinOp::kMul: out(i, j) = x * y; break;
        case BinOp::kDiv: out(i, j) = x / y; break;
      }
    }
  }
  return Tensor::make(std::move(out), {a, b}, [op, ar, ac, br, bc](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const Matrix& g = self.grad;
    Matrix ga(pa.value.rows(), pa.value.cols());
    Matrix gb(pb.value.rows(), pb.value.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      for (std::size_t j = 0; j < g.cols(); ++j) {
        const std::size_t ai = ar ? 0 : i, aj = ac ? 0 : j, bi = br ? 0 : i, bj = bc ? 0 : j;
        const double x = pa.value(ai, aj);
        const double y = pb.value(bi, bj);
        const double gij = g(i, j);
        switch (op) {
          case BinOp::kAdd: ga(ai, aj) += gij; gb(bi, bj) += gij; break;
          case BinOp::kSub: ga(ai, aj) += gij; gb(bi, bj) -= gij; break;
          case BinOp::kMul: ga(ai, aj) += gij * y; gb(bi, bj) += gij * x; break;
          case BinOp::kDiv:
            ga(ai, aj) += gij / y;
            gb(bi, bj) -= gij * x / (y * y);
            break;
        }
      }
    }
    if (pa.requires_grad) pa.accumulate(ga);
    if (pb.requires_grad) pb.accumulate(gb);
  });
}

// Elementwise unary op given value and derivative (as a function of x and y).
template <typename F, typename D>
Tensor unary(const Tensor& x, F f, D df) {
  const Matrix& xv = x.value();
  Matrix out(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return Tensor::make(std::move(out), {x}, [df](Node& self) {
    Node& p = *self.parents[0];
    Matrix g(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = self.grad[i] * df(p.value[i], self.value[i]);
    p.accumulate(g);
  });
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor operator+(const Tensor& a, const Tensor& b) { return binary(a, b, BinOp::kAdd); }
Tensor operator-(const Tensor& a, const Tensor& b) { return binary(a, b, BinOp::kSub); }
Tensor operator*(const Tensor& a, const Tensor& b) { return binary(a, b, BinOp::kMul); }
Tensor operator/(const Tensor& a, const Tensor& b) { return binary(a, b, BinOp::kDiv); }

Tensor operator-(const Tensor& a) {
  return unary(a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}
Tensor operator+(const Tensor& a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}
Tensor operator*(const Tensor& a, double s) {
  return unary(a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}
Tensor operator-(double s, const Tensor& a) {
  return unary(a, [s](double x) { return s - x; }, [](double, double) { return -1.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  return Tensor::make(nn::matmul(a.value(), b.value()), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(matmul_nt(self.grad, pb.value));
    if (pb.requires_grad) pb.accumulate(matmul_tn(pa.value, self.grad));
  });
}

Tensor matmul(const Matrix& a, const Tensor& b) {
  return Tensor::make(nn::matmul(a, b.value()), {b}, [a](Node& self) {
    self.parents[0]->accumulate(matmul_tn(a, self.grad));
  });
}

Tensor transpose(const Tensor& a) {
  return Tensor::make(nn::transpose(a.value()), {a}, [](Node& self) {
    self.parents[0]->accumulate(nn::transpose(self.grad));
  });
}

Tensor relu(const Tensor& x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(x, [slope](double v) { return v > 0.0 ? v : slope * v; },
               [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& x) {
  return unary(x, [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); },
               [](double v, double) { return stable_sigmoid(v); });
}

Tensor log(const Tensor& x) {
  return unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor exp(const Tensor& x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor sqrt(const Tensor& x) {
  return unary(x, [](double v) { return std::sqrt(v); },
               [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor square(const Tensor& x) {
  return unary(x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

namespace {

// Softmax of each row over the columns where `mask` is set (all when null).
Matrix softmax_forward(const Matrix& x, const Matrix* mask) {
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (mask && (*mask)(i, j) == 0.0) continue;
      any = true;
      // NaN must reach the output so callers can detect divergence
      peak = std::isnan(x(i, j)) || std::isnan(peak) ? std::numeric_limits<double>::quiet_NaN()
                                                     : std::max(peak, x(i, j));
    }
    if (!any) {
      throw DataError("softmax row " + std::to_string(i) + " has an empty neighbourhood");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (!mask || (*mask)(i, j) != 0.0) {
        y(i, j) = std::exp(x(i, j) - peak);
        total += y(i, j);
      }
    }
    for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) /= total;
  }
  return y;
}

void softmax_backward(Node& self) {
  const Matrix& y = self.value;
  Matrix g(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < y.cols(); ++j) dot += self.grad(i, j) * y(i, j);
    for (std::size_t j = 0; j < y.cols(); ++j) g(i, j) = y(i, j) * (self.grad(i, j) - dot);
  }
  self.parents[0]->accumulate(g);
}

}  // namespace

Tensor softmax_rows(const Tensor& x) {
  return Tensor::make(softmax_forward(x.value(), nullptr), {x}, softmax_backward);
}

Tensor masked_softmax_rows(const Tensor& x, const Matrix& mask) {
  if (!mask.same_shape(x.value())) throw DataError("softmax mask shape mismatch");
  return Tensor::make(softmax_forward(x.value(), &mask), {x}, softmax_backward);
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return Tensor::make(Matrix(1, 1, total), {x}, [](Node& self) {
    Node& p = *self.parents[0];
    p.accumulate(Matrix(p.value.rows(), p.value.cols(), self.grad[0]));
  });
}

Tensor mean(const Tensor& x) {
  const auto n = static_cast<double>(x.value().size());
  if (n == 0) throw DataError("mean of an empty tensor");
  return sum(x) * (1.0 / n);
}

Tensor col_sum(const Tensor& x) {
  const Matrix& v = x.value();
  Matrix out(1, v.cols());
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) out(0, j) += v(i, j);
  }
  return Tensor::make(std::move(out), {x}, [](Node& self) {
    Node& p = *self.parents[0];
    Matrix g(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = self.grad(0, j);
    }
    p.accumulate(g);
  });
}

Tensor col_mean(const Tensor& x) {
  if (x.rows() == 0) throw DataError("col_mean of an empty tensor");
  return col_sum(x) * (1.0 / static_cast<double>(x.rows()));
}

Tensor col_max(const Tensor& x) {
  const Matrix& v = x.value();
  if (v.rows() == 0) throw DataError("max-pool over zero rows");
  Matrix out(1, v.cols());
  std::vector<std::size_t> arg(v.cols(), 0);
  for (std::size_t j = 0; j < v.cols(); ++j) out(0, j) = v(0, j);
  for (std::size_t i = 1; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) {
      if (v(i, j) > out(0, j)) {
        out(0, j) = v(i, j);
        arg[j] = i;
      }
    }
  }
  return Tensor::make(std::move(out), {x}, [arg](Node& self) {
    Node& p = *self.parents[0];
    Matrix g(p.value.rows(), p.value.cols());
    for (std::size_t j = 0; j < arg.size(); ++j) g(arg[j], j) = self.grad(0, j);
    p.accumulate(g);
  });
}

Tensor segment_mean(const Tensor& x, const std::vector<int>& segment, std::size_t count) {
  const Matrix& v = x.value();
  if (segment.size() != v.rows()) throw DataError("segment ids must cover every row");
  std::vector<double> sizes(count, 0.0);
  for (int s : segment) {
    if (s < 0 || static_cast<std::size_t>(s) >= count) throw DataError("segment id out of range");
    sizes[static_cast<std::size_t>(s)] += 1.0;
  }
  for (double s : sizes) {
    if (s == 0.0) throw DataError("empty segment in segment_mean");
  }
  Matrix out(count, v.cols());
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const auto s = static_cast<std::size_t>(segment[i]);
    for (std::size_t j = 0; j < v.cols(); ++j) out(s, j) += v(i, j);
  }
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t j = 0; j < v.cols(); ++j) out(s, j) /= sizes[s];
  }
  return Tensor::make(std::move(out), {x}, [segment, sizes](Node& self) {
    Node& p = *self.parents[0];
    Matrix g(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const auto s = static_cast<std::size_t>(segment[i]);
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = self.grad(s, j) / sizes[s];
    }
    p.accumulate(g);
  });
}

Tensor mse(const Tensor& a, const Tensor& b) {
  if (!a.value().same_shape(b.value())) throw DataError("mse operands differ in shape");
  return mean(square(a - b));
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DataError("concat of nothing");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Tensor& t : parts) {
    if (t.rows() != rows) throw DataError("concat_cols: row counts differ");
    cols += t.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Tensor& t : parts) {
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy_n(t.value().row(i), t.cols(), out.row(i) + offset);
    }
    offset += t.cols();
  }
  return Tensor::make(std::move(out), parts, [](Node& self) {
    std::size_t off = 0;
    for (auto& parent : self.parents) {
      const std::size_t c = parent->value.cols();
      if (parent->requires_grad) {
        Matrix g(parent->value.rows(), c);
        for (std::size_t i = 0; i < g.rows(); ++i) std::copy_n(self.grad.row(i) + off, c, g.row(i));
        parent->accumulate(g);
      }
      off += c;
    }
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.cols()) throw DataError("slice_cols out of range");
  Matrix out(x.rows(), count);
  for (std::size_t i = 0; i < x.rows(); ++i) std::copy_n(x.value().row(i) + begin, count, out.row(i));
  return Tensor::make(std::move(out), {x}, [begin, count](Node& self) {
    Node& p = *self.parents[0];
    Matrix g(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < g.rows(); ++i) std::copy_n(self.grad.row(i), count, g.row(i) + begin);
    p.accumulate(g);
  });
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.rows()) throw DataError("slice_rows out of range");
  Matrix out(count, x.cols());
  std::copy_n(x.value().row(begin), count * x.cols(), out.data());
  return Tensor::make(std::move(out), {x}, [begin](Node& self) {
    Node& p = *self.parents[0];
    Matrix g(p.value.rows(), p.value.cols());
    std::copy_n(self.grad.data(), self.grad.size(), g.row(begin));
    p.accumulate(g);
  });
}

Tensor reshape(const Tensor& x, std::size_t rows, std::size_t cols) {
  if (rows * cols != x.value().size()) throw DataError("reshape changes element count");
  Matrix out(rows, cols);
  std::copy_n(x.value().data(), out.size(), out.data());
  return Tensor::make(std::move(out), {x}, [](Node& self) {
    Node& p = *self.parents[0];
    Matrix g(p.value.rows(), p.value.cols());
    std::copy_n(self.grad.data(), g.size(), g.data());
    p.accumulate(g);
  });
}

Tensor chamfer_loss(const Tensor& p, const Tensor& q) {
  if (p.cols() != 3 || q.cols() != 3) throw DataError("chamfer_loss needs n x 3 point sets");
  if (p.rows() == 0 || q.rows() == 0) throw DataError("chamfer_loss of an empty point set");
  auto to_points = [](const Matrix& m) {
    geometry::PointSet pts(static_cast<Eigen::Index>(m.rows()), 3);
    std::copy_n(m.data(), m.size(), pts.data());
    return pts;
  };
  const auto pp = to_points(p.value());
  const auto qq = to_points(q.value());
  const auto forward = metrics::nearest_neighbors(pp, qq);
  const auto back = metrics::nearest_neighbors(qq, pp);
  double a = 0.0, b = 0.0;
  for (double d : forward.sq_dist) a += d;
  for (double d : back.sq_dist) b += d;
  const double na = static_cast<double>(pp.rows());
  const double nb = static_cast<double>(qq.rows());
  Matrix value(1, 1, a / na + b / nb);

  return Tensor::make(std::move(value), {p, q},
                      [fi = forward.index, bi = back.index, na, nb](Node& self) {
    Node& np = *self.parents[0];
    Node& nq = *self.parents[1];
    const double g = self.grad[0];
    Matrix gp(np.value.rows(), 3), gq(nq.value.rows(), 3);
    for (std::size_t i = 0; i < fi.size(); ++i) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double d = 2.0 * g * (np.value(i, c) - nq.value(fi[i], c)) / na;
        gp(i, c) += d;
        gq(fi[i], c) -= d;
      }
    }
    for (std::size_t j = 0; j < bi.size(); ++j) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double d = 2.0 * g * (nq.value(j, c) - np.value(bi[j], c)) / nb;
        gq(j, c) += d;
        gp(bi[j], c) -= d;
      }
    }
    if (np.requires_grad) np.accumulate(gp);
    if (nq.requires_grad) nq.accumulate(gq);
  });
}

Matrix gaussian_init(std::size_t rows, std::size_t cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = gauss(rng);
  return m;
}

Matrix gaussian_init(std::size_t rows, std::size_t cols, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return gaussian_init(rows, cols, scale, rng);
}

}  // namespace curvy::nn
