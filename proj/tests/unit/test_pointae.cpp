#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "curvy/error.hpp"
#include "curvy/geometry.hpp"
#include "curvy/metrics.hpp"
#include "curvy/pointae.hpp"
#include "curvy/shapes.hpp"

using namespace curvy;
using namespace curvy::pointae;

namespace {

AEConfig small_config(std::size_t points = 64) {
  AEConfig c;
  c.emb = 32;
  c.points = points;
  return c;
}

PointSet random_cloud(std::size_t n, std::uint64_t seed) {
  return geometry::sample_surface(shapes::icosphere(2), n, seed) * 0.5;
}

}  // namespace

TEST_CASE("encoder is order-free") {
  const auto ae = AEParams::init(small_config(), 1);
  const auto cloud = random_cloud(200, 3);
  std::mt19937_64 rng(4);
  std::vector<Eigen::Index> order(200);
  for (Eigen::Index i = 0; i < 200; ++i) order[static_cast<std::size_t>(i)] = i;
  const auto e = encode(ae, cloud);
  CHECK(e.rows() == 1);
  CHECK(e.cols() == 32);
  CHECK(e.all_finite());
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    PointSet shuffled(200, 3);
    for (Eigen::Index i = 0; i < 200; ++i) shuffled.row(i) = cloud.row(order[static_cast<std::size_t>(i)]);
    CHECK(encode(ae, shuffled) == e);
  }
}

TEST_CASE("encoder ignores duplicated points") {
  const auto ae = AEParams::init(small_config(), 2);
  PointSet one(1, 3);
  one << 0.1, -0.2, 0.3;
  PointSet many(50, 3);
  for (Eigen::Index i = 0; i < 50; ++i) many.row(i) = one.row(0);
  CHECK(encode(ae, one) == encode(ae, many));
  CHECK_THROWS_AS(encode(ae, PointSet(0, 3)), DataError);
}

TEST_CASE("decoder shape and determinism") {
  auto ae = AEParams::init(small_config(), 3);
  Embedding e(1, 32);
  for (std::size_t i = 0; i < 32; ++i) e[i] = std::sin(static_cast<double>(i));
  const auto a = decode(ae, e);
  CHECK(a.rows() == 64);
  CHECK(a.cols() == 3);
  CHECK(a.allFinite());
  CHECK(decode(ae, e) == a);
  CHECK_THROWS_AS(decode(ae, Embedding(1, 31)), DataError);

  // zero weights: every point is the final bias triple
  for (auto& layer : ae.decoder) layer.W.mutable_value().fill(0.0);
  auto& bias = ae.decoder.back().b.mutable_value();
  for (std::size_t i = 0; i < bias.size(); ++i) bias[i] = static_cast<double>(i % 3) - 0.25;
  const auto flat = decode(ae, Embedding(1, 32));
  for (Eigen::Index i = 0; i < flat.rows(); ++i) {
    CHECK(flat(i, 0) == -0.25);
    CHECK(flat(i, 1) == 0.75);
    CHECK(flat(i, 2) == 1.75);
  }
}

TEST_CASE("train_ae with zero epochs returns the initialization") {
  const auto cfg = small_config();
  const auto res = train_ae({random_cloud(64, 1)}, cfg, {.epochs = 0, .seed = 9});
  CHECK(res.losses.empty());
  const auto init = AEParams::init(cfg, 9);
  const auto a = res.params.parameters();
  const auto b = init.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].second.value() == b[i].second.value());
}

TEST_CASE("train_ae memorizes a single cloud") {
  const auto cloud = random_cloud(64, 5);
  const auto res = train_ae({cloud}, small_config(), {.epochs = 500, .seed = 1});
  REQUIRE(res.losses.size() == 500);
  for (double l : res.losses) CHECK(std::isfinite(l));
  const auto initial = res.losses.front();
  const double final_chamfer = metrics::chamfer(decode(res.params, encode(res.params, cloud)), cloud);
  CHECK(final_chamfer < 0.05 * initial);

  // smoothed curve never rises
  const auto smoothed = smooth(res.losses, 10);
  for (std::size_t i = 1; i < smoothed.size(); ++i) CHECK(smoothed[i] <= smoothed[i - 1] * (1.0 + 1e-9));
}

TEST_CASE("train_ae is deterministic and errors on bad input") {
  const std::vector<PointSet> clouds = {random_cloud(32, 1), random_cloud(40, 2)};
  const auto a = train_ae(clouds, small_config(32), {.epochs = 5, .seed = 4});
  const auto b = train_ae(clouds, small_config(32), {.epochs = 5, .seed = 4});
  CHECK(a.losses == b.losses);
  CHECK_THROWS_AS(train_ae({}, small_config(), {.epochs = 1}), DataError);
  CHECK_THROWS_AS(train_ae({PointSet(0, 3)}, small_config(), {.epochs = 1}), DataError);
  auto bad = random_cloud(16, 3);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train_ae({bad}, small_config(16), {.epochs = 1}), DivergenceError);
}

TEST_CASE("decode(encode) responds boundedly to a point perturbation") {
  const auto cloud = random_cloud(64, 6);
  const auto ae = train_ae({cloud}, small_config(), {.epochs = 100, .seed = 2}).params;
  const double base = metrics::chamfer(decode(ae, encode(ae, cloud)), cloud);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto moved = cloud;
    const auto i = static_cast<Eigen::Index>(rng() % 64);
    geometry::Vec3 d(g(rng), g(rng), g(rng));
    moved.row(i) += (1e-3 * d.normalized()).transpose();
    worst = std::max(worst, std::abs(metrics::chamfer(decode(ae, encode(ae, moved)), moved) - base));
  }
  // regression fixture bound
  CHECK(worst <= 5e-4);
}

TEST_CASE("smooth is a trailing moving average") {
  const auto s = smooth({1, 2, 3, 4}, 2);
  CHECK(s == std::vector<double>{1, 1.5, 2.5, 3.5});
}
