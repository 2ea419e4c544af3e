#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "curvy/error.hpp"
#include "curvy/gradsuite.hpp"
#include "curvy/nn/gradcheck.hpp"
#include "curvy/nn/layers.hpp"
#include "curvy/nn/ops.hpp"
#include "curvy/nn/optim.hpp"

using namespace curvy;
using namespace curvy::nn;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  return gaussian_init(r, c, 1.0, rng);
}

Matrix ring(std::size_t n, bool self_loops) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, (i + 1) % n) = 1.0;
    a((i + 1) % n, i) = 1.0;
    if (self_loops) a(i, i) = 1.0;
  }
  return a;
}

Matrix random_graph(std::size_t n, std::mt19937_64& rng) {
  Matrix a(n, n);
  std::bernoulli_distribution edge(0.4);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (edge(rng)) a(i, j) = a(j, i) = 1.0;
    }
  }
  return a;
}

Matrix permute_rows(const Matrix& m, const std::vector<std::size_t>& p) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(i, c) = m(p[i], c);
  }
  return out;
}

Matrix conjugate(const Matrix& a, const std::vector<std::size_t>& p) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(p[i], p[j]);
  }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  REQUIRE(a.same_shape(b));
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("Matrix kernels") {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{5, 6}, {7, 8}};
  CHECK(matmul(a, b) == Matrix{{19, 22}, {43, 50}});
  CHECK(matmul_nt(a, b) == Matrix{{17, 23}, {39, 53}});
  CHECK(matmul_tn(a, b) == Matrix{{26, 30}, {38, 44}});
  CHECK(transpose(a) == Matrix{{1, 3}, {2, 4}});
}

TEST_CASE("dense_forward examples") {
  std::mt19937_64 rng(1);
  DenseLayer id{Tensor::constant(Matrix{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), Tensor::constant(Matrix(1, 3))};
  const Matrix x = random_matrix(4, 3, rng);
  CHECK(dense_forward(id, Tensor::constant(x)).value() == x);

  DenseLayer sum{Tensor::constant(Matrix{{1}, {1}}), Tensor::constant(Matrix{{0}})};
  CHECK(dense_forward(sum, Tensor::constant(Matrix{{1, 2}})).value() == Matrix{{3}});
  CHECK_THROWS_AS(dense_forward(sum, Tensor::constant(Matrix{{1, 2, 3}})), DataError);
}

TEST_CASE("gcn_forward examples") {
  const Matrix a{{0, 1}, {1, 0}};
  const auto out = gcn_forward(Tensor::constant(Matrix{{1}, {0}}), a, Tensor::constant(Matrix{{1}}));
  CHECK(out.value()(0, 0) == doctest::Approx(0.5));
  CHECK(out.value()(1, 0) == doctest::Approx(0.5));
  // existing self-loops are not added twice
  const Matrix with_loops{{1, 1}, {1, 1}};
  CHECK(gcn_normalized_adjacency(with_loops) == gcn_normalized_adjacency(a));

  std::mt19937_64 rng(2);
  const Matrix x = random_matrix(5, 3, rng);
  Matrix eye(3, 3);
  for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
  Matrix no_edges(5, 5);
  CHECK(max_abs_diff(gcn_forward(Tensor::constant(x), no_edges, Tensor::constant(eye)).value(), x) == 0.0);
  const auto zero = gcn_forward(Tensor::constant(x), ring(5, false), Tensor::constant(Matrix(3, 2)));
  CHECK(zero.value() == Matrix(5, 2));
  CHECK_THROWS_AS(gcn_normalized_adjacency(Matrix{{0, 1}, {0, 0}}), DataError);
}

TEST_CASE("sage_forward examples") {
  const Matrix a{{0, 1}, {1, 0}};
  const auto out = sage_forward(Tensor::constant(Matrix{{1}, {3}}), a, Tensor::constant(Matrix{{1}}),
                                Tensor::constant(Matrix{{1}}));
  CHECK(out.value()(0, 0) == 4.0);
  CHECK(out.value()(1, 0) == 4.0);

  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix ws = random_matrix(3, 2, rng);
  const Matrix wn = random_matrix(3, 2, rng);
  Matrix loops_only(4, 4);
  for (std::size_t i = 0; i < 4; ++i) loops_only(i, i) = 1.0;
  CHECK(sage_forward(Tensor::constant(x), loops_only, Tensor::constant(ws), Tensor::constant(wn)).value() ==
        matmul(x, ws));

  const Matrix same{{2, -1}, {2, -1}};
  const auto eq = sage_forward(Tensor::constant(same), a, Tensor::constant(Matrix{{1, 2}, {3, 4}}),
                               Tensor::constant(Matrix{{0.5, 1}, {-1, 2}}));
  CHECK(eq.value()(0, 0) == eq.value()(1, 0));
  CHECK(eq.value()(0, 1) == eq.value()(1, 1));
  CHECK_THROWS_AS(sage_forward(Tensor::constant(x), loops_only, Tensor::constant(Matrix(2, 2)), Tensor::constant(wn)),
                  DataError);
}

TEST_CASE("gat_forward examples") {
  std::mt19937_64 rng(4);
  auto layer = GATLayer::init(3, 2, rng);
  Matrix alpha;

  // node 0 attends only to node 1
  const Matrix single{{0, 1}, {1, 0}};
  const Matrix x = random_matrix(2, 3, rng);
  const auto out = gat_forward(layer, Tensor::constant(x), single, &alpha);
  CHECK(alpha(0, 1) == 1.0);
  CHECK(alpha(0, 0) == 0.0);
  const Matrix wx = matmul(x, layer.W.value());
  CHECK(max_abs_diff(out.value(), Matrix{{wx(1, 0), wx(1, 1)}, {wx(0, 0), wx(0, 1)}}) <= 1e-15);

  // identical neighbour features: equal weights
  const Matrix twin{{0, 1, 1}, {1, 0, 0}, {1, 0, 0}};
  Matrix xt = random_matrix(3, 3, rng);
  for (std::size_t c = 0; c < 3; ++c) xt(2, c) = xt(1, c);
  gat_forward(layer, Tensor::constant(xt), twin, &alpha);
  CHECK(alpha(0, 1) == doctest::Approx(0.5));
  CHECK(alpha(0, 2) == doctest::Approx(0.5));

  // a = 0: uniform attention, output is the neighbour mean of W x
  layer.a = Tensor::constant(Matrix(4, 1));
  const Matrix a5 = ring(5, true);
  const Matrix x5 = random_matrix(5, 3, rng);
  const auto mean_out = gat_forward(layer, Tensor::constant(x5), a5, &alpha);
  const Matrix wx5 = matmul(x5, layer.W.value());
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) CHECK(alpha(i, j) == doctest::Approx(a5(i, j) / 3.0));
    for (std::size_t c = 0; c < 2; ++c) {
      const double expect = (wx5((i + 4) % 5, c) + wx5(i, c) + wx5((i + 1) % 5, c)) / 3.0;
      CHECK(mean_out.value()(i, c) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(gat_forward(layer, Tensor::constant(x5), Matrix(5, 5)), DataError);
}

TEST_CASE("attention and softmax rows sum to one") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 10;
    const Matrix x = random_matrix(n, 4, rng);
    const Matrix sm = softmax_rows(Tensor::constant(x)).value();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < 4; ++c) s += sm(i, c);
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
    const auto layer = GATLayer::init(4, 3, rng);
    const Matrix a = random_graph(n, rng);
    Matrix alpha;
    gat_forward(layer, Tensor::constant(x), a, &alpha);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (a(i, j) == 0.0) CHECK(alpha(i, j) == 0.0);
        s += alpha(i, j);
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("diffnorm_forward examples") {
  const Matrix x{{1}, {3}};
  const auto out = diffnorm_forward(Tensor::constant(x), Tensor::constant(Matrix{{0.7}}), 1.0);
  CHECK(std::abs(out.value()(0, 0)) <= 1e-4);
  CHECK(std::abs(out.value()(1, 0) - 4.0) <= 1e-4);

  std::mt19937_64 rng(6);
  const Matrix xr = random_matrix(6, 5, rng);
  const Matrix w = random_matrix(5, 4, rng);
  CHECK(diffnorm_forward(Tensor::constant(xr), Tensor::constant(w), 0.0).value() == xr);

  Matrix constant(4, 2, 1.5);
  CHECK(max_abs_diff(diffnorm_forward(Tensor::constant(constant), Tensor::constant(random_matrix(2, 3, rng)), 1.0).value(),
                     constant) <= 1e-12);
}

TEST_CASE("primitive ops") {
  const auto x = Tensor::constant(Matrix{{-2, 0, 3}});
  CHECK(relu(x).value() == Matrix{{0, 0, 3}});
  CHECK(leaky_relu(x, 0.2).value() == Matrix{{-0.4, 0, 3}});
  CHECK(sigmoid(Tensor::constant(Matrix{{0}})).item() == 0.5);
  CHECK(mse(Tensor::constant(Matrix{{1, 2}}), Tensor::constant(Matrix{{3, 2}})).item() == 2.0);
  const auto seg = segment_mean(Tensor::constant(Matrix{{1}, {3}, {10}}), {0, 0, 1}, 2);
  CHECK(seg.value() == Matrix{{2}, {10}});
  CHECK(concat_cols({x, x}).value() == Matrix{{-2, 0, 3, -2, 0, 3}});
  CHECK(col_max(Tensor::constant(Matrix{{1, 5}, {4, 2}})).value() == Matrix{{4, 5}});
  CHECK(softplus(Tensor::constant(Matrix{{1000.0}})).item() == 1000.0);
  CHECK(std::isfinite(softplus(Tensor::constant(Matrix{{-1000.0}})).item()));
  CHECK(gaussian_init(3, 3, 1.0, 7ull) == gaussian_init(3, 3, 1.0, 7ull));
  CHECK_THROWS_AS(mse(Tensor::constant(Matrix(1, 2)), Tensor::constant(Matrix(2, 1))), DataError);
  CHECK_THROWS_AS(segment_mean(Tensor::constant(Matrix(2, 1)), {0, 2}, 2), DataError);
}

TEST_CASE("backward accumulates through shared nodes") {
  auto w = Tensor::parameter(Matrix{{2.0}});
  const auto y = w * w + w;  // dy/dw = 2w + 1
  backward(sum(y));
  CHECK(w.grad()(0, 0) == 5.0);
  w.zero_grad();
  CHECK(w.grad()(0, 0) == 0.0);
  backward(sum(detach(w) * w));
  CHECK(w.grad()(0, 0) == 2.0);
}

TEST_CASE("grad_check on dense, gat and diffnorm instances") {
  std::mt19937_64 rng(7);
  auto x = Tensor::parameter(random_matrix(4, 3, rng));
  auto dense = DenseLayer::init(3, 2, rng);
  dense.W = Tensor::parameter(dense.W.value());
  dense.b = Tensor::parameter(dense.b.value());
  auto r = grad_check([&] { return sum(dense_forward(dense, x)); }, {x, dense.W, dense.b});
  CHECK(r.max_rel_error <= 1e-5);
  CHECK(r.checked == 12 + 6 + 2);

  auto x5 = Tensor::parameter(random_matrix(5, 3, rng));
  auto gat = GATLayer::init(3, 4, rng);
  gat.W = Tensor::parameter(gat.W.value());
  gat.a = Tensor::parameter(gat.a.value());
  const Matrix a5 = ring(5, true);
  r = grad_check([&] { return sum(gat_forward(gat, x5, a5)); }, {x5, gat.W, gat.a});
  CHECK(r.max_rel_error <= 1e-5);

  auto x6 = Tensor::parameter(random_matrix(6, 5, rng));
  auto w = Tensor::parameter(random_matrix(5, 4, rng));
  auto lambda = Tensor::parameter(Matrix{{0.3}});
  r = grad_check([&] { return sum(square(diffnorm_forward(x6, w, lambda))); }, {x6, w, lambda});
  CHECK(r.max_rel_error <= 1e-5);
}

TEST_CASE("gradient suite passes") {
  const auto results = gradsuite::run(2024, 3);
  std::set<std::string> seen;
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.instance);
    CHECK(r.report.max_rel_error <= gradsuite::kTolerance);
    CHECK(r.report.checked > 0);
    seen.insert(r.name);
  }
  for (const auto& name : gradsuite::case_names()) CHECK(seen.count(name) == 1);
  CHECK(gradsuite::run(5, 1, "gat").size() == 1);
}

TEST_CASE("graph layers are permutation equivariant") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + rng() % 8;
    const Matrix x = random_matrix(n, 4, rng);
    const Matrix a = random_graph(n, rng);
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    std::shuffle(p.begin(), p.end(), rng);
    const Matrix px = permute_rows(x, p);
    const Matrix pa = conjugate(a, p);

    const auto w = Tensor::constant(random_matrix(4, 3, rng));
    CHECK(max_abs_diff(gcn_forward(Tensor::constant(px), pa, w).value(),
                       permute_rows(gcn_forward(Tensor::constant(x), a, w).value(), p)) <= 1e-9);
    const auto w2 = Tensor::constant(random_matrix(4, 3, rng));
    CHECK(max_abs_diff(sage_forward(Tensor::constant(px), pa, w, w2).value(),
                       permute_rows(sage_forward(Tensor::constant(x), a, w, w2).value(), p)) <= 1e-9);
    const auto gat = GATLayer::init(4, 3, rng);
    CHECK(max_abs_diff(gat_forward(gat, Tensor::constant(px), pa).value(),
                       permute_rows(gat_forward(gat, Tensor::constant(x), a).value(), p)) <= 1e-9);
  }
}

TEST_CASE("forward passes are deterministic") {
  std::mt19937_64 r1(11), r2(11);
  const auto l1 = GATLayer::init(4, 3, r1);
  const auto l2 = GATLayer::init(4, 3, r2);
  std::mt19937_64 rx(12);
  const Matrix x = random_matrix(7, 4, rx);
  std::mt19937_64 ra(13);
  const Matrix a = random_graph(7, ra);
  CHECK(gat_forward(l1, Tensor::constant(x), a).value() == gat_forward(l2, Tensor::constant(x), a).value());
}

TEST_CASE("Adam minimizes a quadratic") {
  auto w = Tensor::parameter(Matrix{{3.0, -2.0}});
  Adam adam({w}, {.lr = 0.1});
  const auto target = Tensor::constant(Matrix{{1.0, 0.5}});
  for (int i = 0; i < 500; ++i) {
    backward(mse(w, target));
    adam.step();
  }
  CHECK(std::abs(w.value()(0, 0) - 1.0) < 1e-3);
  CHECK(std::abs(w.value()(0, 1) - 0.5) < 1e-3);
  CHECK(w.grad()(0, 0) == 0.0);  // step clears gradients
}
