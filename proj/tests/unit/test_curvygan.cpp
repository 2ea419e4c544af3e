#include <doctest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "curvy/curvygan.hpp"
#include "curvy/error.hpp"
#include "curvy/metrics.hpp"
#include "curvy/nn/gradcheck.hpp"
#include "curvy/pipeline.hpp"
#include "curvy/shapes.hpp"
#include "fixtures.hpp"

using namespace curvy;
using namespace curvy::curvygan;

namespace {

GanConfig small_gan() {
  GanConfig c;
  c.hidden = 16;
  c.head_hidden = 32;
  c.disc_hidden = 16;
  c.disc_head = {32, 16};
  return c;
}

pointae::AEConfig small_ae() {
  pointae::AEConfig c;
  c.emb = 16;
  c.points = 64;
  c.encoder_hidden = {32, 64};
  c.decoder_hidden = {64, 128};
  return c;
}

double max_abs_diff(const nn::Matrix& a, const nn::Matrix& b) {
  REQUIRE(a.same_shape(b));
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

struct Relabeling {
  std::vector<std::size_t> perm;
  std::vector<std::size_t> shifts;
};

Relabeling random_relabeling(std::size_t m, std::size_t k, std::mt19937_64& rng) {
  Relabeling r{fixtures::random_permutation(m, rng), std::vector<std::size_t>(m)};
  for (auto& s : r.shifts) s = rng() % k;
  return r;
}

nn::Matrix permute_noise(const nn::Matrix& noise, const std::vector<std::size_t>& order) {
  nn::Matrix out(noise.rows(), noise.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t c = 0; c < noise.cols(); ++c) out(i, c) = noise(order[i], c);
  }
  return out;
}

}  // namespace

TEST_CASE("generator is invariant to section order and piece shifts") {
  std::mt19937_64 rng(1);
  const auto g = GeneratorParams::init(GanConfig{}, 32, 7);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 2 + rng() % 7;
    const std::size_t k = 3 + rng() % 6;
    const auto graph = graphrep::build_graph(fixtures::random_set(m, k, rng));
    const auto noise = make_noise(graph.node_count(), g.config, rng);
    const auto e = generate(g, graph, noise);
    for (int p = 0; p < 5; ++p) {
      const auto r = random_relabeling(m, k, rng);
      const auto order = graphrep::permutation_node_order(graph, r.perm, r.shifts);
      const auto pg = graphrep::permute_graph(graph, r.perm, r.shifts);
      CHECK(max_abs_diff(generate(g, pg, permute_noise(noise, order)), e) <= 1e-6);
    }
  }
}

TEST_CASE("generator adapts to any m and k") {
  std::mt19937_64 rng(2);
  const auto g = GeneratorParams::init(small_gan(), 16, 3);
  for (std::size_t m : {1u, 5u, 17u, 32u}) {
    for (std::size_t k : {2u, 3u, 9u, 16u}) {
      const auto graph = graphrep::build_graph(fixtures::random_set(m, k, rng));
      const auto e = generate(g, graph, make_noise(graph.node_count(), g.config, 5));
      CHECK(e.rows() == 1);
      CHECK(e.cols() == 16);
      CHECK(e.all_finite());
    }
  }
}

TEST_CASE("noise changes the embedding") {
  std::mt19937_64 rng(3);
  const auto g = GeneratorParams::init(GanConfig{}, 32, 4);
  const auto graph = graphrep::build_graph(fixtures::random_set(3, 4, rng));
  const nn::Matrix zero(graph.node_count(), g.config.noise_dim);
  const auto a = generate(g, graph, zero);
  const auto b = generate(g, graph, make_noise(graph.node_count(), g.config, 11));
  CHECK(max_abs_diff(a, b) > 0.0);
  CHECK_THROWS_AS(generate(g, graph, nn::Matrix(graph.node_count(), 3)), DataError);
  // one-sigma Gaussian noise
  const auto big = make_noise(4000, g.config, 12);
  double s = 0, s2 = 0;
  for (double v : big.values()) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(big.size());
  CHECK(std::abs(s / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.03);
}

TEST_CASE("discriminator range, invariance and zero weights") {
  std::mt19937_64 rng(4);
  auto d = DiscriminatorParams::init(GanConfig{}, 32, 5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + rng() % 5, k = 2 + rng() % 5;
    const auto graph = graphrep::build_graph(fixtures::random_set(m, k, rng));
    const auto e = nn::gaussian_init(1, 32, 3.0, rng);
    const double p = discriminate(d, graph, e);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    const auto r = random_relabeling(m, k, rng);
    CHECK(std::abs(discriminate(d, graphrep::permute_graph(graph, r.perm, r.shifts), e) - p) <= 1e-6);
  }
  for (auto& [name, t] : d.parameters()) t.mutable_value().fill(0.0);
  const auto graph = graphrep::build_graph(fixtures::random_set(2, 3, rng));
  CHECK(discriminate(d, graph, nn::gaussian_init(1, 32, 1.0, rng)) == 0.5);
  CHECK_THROWS_AS(discriminate(d, graph, nn::Matrix(1, 31)), DataError);
}

TEST_CASE("scalar loss forms") {
  CHECK(adversarial_term(0.5, AdversarialMode::kSaturating) == doctest::Approx(std::log(0.5)));
  CHECK(adversarial_term(0.5, AdversarialMode::kNonSaturating) == doctest::Approx(-std::log(0.5)));
  CHECK(discriminator_objective(0.5, 0.5, DiscriminatorMode::kStandard) == doctest::Approx(2.0 * std::log(2.0)));
  double previous = 1e300;
  for (double eps : {1e-2, 1e-4, 1e-8}) {
    const double v = discriminator_objective(1.0 - eps, eps, DiscriminatorMode::kStandard);
    CHECK(v < previous);
    previous = v;
  }
  CHECK(previous < 1e-7);
  // printed form: (1 - log D(fake)) + log D(real)
  CHECK(discriminator_objective(0.5, 0.25, DiscriminatorMode::kPrintedVerbatim) ==
        doctest::Approx(1.0 - std::log(0.25) + std::log(0.5)));
}

TEST_CASE("discriminator_loss on logits") {
  std::mt19937_64 rng(5);
  auto d = DiscriminatorParams::init(small_gan(), 16, 6);
  const auto graph = graphrep::build_graph(fixtures::random_set(2, 3, rng));
  const auto inputs = GraphInputs::from(graph);
  const auto real = nn::Tensor::constant(nn::gaussian_init(1, 16, 1.0, rng));
  const auto fake = nn::Tensor::constant(nn::gaussian_init(1, 16, 1.0, rng));
  const double dr = discriminate(d, graph, real.value());
  const double df = discriminate(d, graph, fake.value());
  for (auto mode : {DiscriminatorMode::kStandard, DiscriminatorMode::kPrintedVerbatim}) {
    CHECK(discriminator_loss(d, inputs, real, fake, mode).item() ==
          doctest::Approx(discriminator_objective(dr, df, mode)).epsilon(1e-12));
  }

  // gradient with respect to the head bias
  auto& bias = d.head.back().b;
  bias = nn::Tensor::parameter(bias.value());
  const auto report = nn::grad_check(
      [&] { return discriminator_loss(d, inputs, real, fake, DiscriminatorMode::kStandard); }, {bias});
  CHECK(report.max_rel_error <= 1e-5);
}

TEST_CASE("generator_loss components") {
  std::mt19937_64 rng(6);
  const auto ae = pointae::AEParams::init(small_ae(), 1).clone(false);
  const auto d = DiscriminatorParams::init(small_gan(), 16, 2);
  const auto graph = graphrep::build_graph(fixtures::random_set(2, 4, rng));
  const auto inputs = GraphInputs::from(graph);
  const auto cloud = geometry::sample_surface(shapes::icosphere(1), 64, 3);
  const auto target = nn::Tensor::constant(pointae::encode(ae, cloud));
  const auto target_cloud = pointae::decode(ae, target);

  // perfect generator
  auto loss = generator_loss(d, ae, inputs, target, target, target_cloud, {}, AdversarialMode::kSaturating);
  CHECK(loss.mse == 0.0);
  CHECK(loss.chamfer == 0.0);
  const double df = discriminate(d, graph, target.value());
  CHECK(loss.adversarial == doctest::Approx(std::log(1.0 - df)).epsilon(1e-12));
  CHECK(loss.total.item() == doctest::Approx(loss.adversarial));

  // chamfer term matches the metric on the decoded clouds
  const auto fake = nn::Tensor::constant(nn::gaussian_init(1, 16, 1.0, rng));
  loss = generator_loss(d, ae, inputs, fake, target, target_cloud, {}, AdversarialMode::kNonSaturating);
  const auto fake_cloud = pointae::decode(ae, fake.value());
  CHECK(loss.chamfer == doctest::Approx(metrics::chamfer(fake_cloud, pointae::to_point_set(target_cloud.value())))
                            .epsilon(1e-12));
  CHECK(loss.mse == doctest::Approx(nn::mse(fake, target).item()));
  CHECK(loss.total.item() == doctest::Approx(loss.adversarial + loss.chamfer + loss.mse).epsilon(1e-12));
  const LossWeights w{.adversarial = 0.0, .chamfer = 2.0, .mse = 0.5};
  const auto weighted = generator_loss(d, ae, inputs, fake, target, target_cloud, w, AdversarialMode::kNonSaturating);
  CHECK(weighted.total.item() == doctest::Approx(2.0 * loss.chamfer + 0.5 * loss.mse).epsilon(1e-12));
}

namespace {

std::vector<GanSample> toy_samples(std::size_t count, std::size_t points, std::uint64_t seed) {
  std::vector<GanSample> out;
  pipeline::SectionOptions opts;
  opts.planes = 4;
  opts.encode.k = 4;
  std::size_t i = 0;
  for (const auto& shape : shapes::toy_corpus(count, seed)) {
    const auto sections = pipeline::cross_sections(shape.mesh, opts);
    out.push_back({graphrep::build_graph(sections.set), geometry::sample_surface(shape.mesh, points, 100 + i++)});
  }
  return out;
}

}  // namespace

TEST_CASE("train_gan basics") {
  const auto data = toy_samples(3, 64, 1);
  const auto ae = pointae::train_ae({data[0].cloud, data[1].cloud, data[2].cloud}, small_ae(),
                                    {.epochs = 20, .seed = 1})
                      .params;

  const auto zero = train_gan(data, ae, small_gan(), {.epochs = 0, .seed = 5});
  CHECK(zero.curve.empty());
  const auto init = GeneratorParams::init(small_gan(), 16, 5);
  const auto a = zero.generator.parameters();
  const auto b = init.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].second.value() == b[i].second.value());

  const auto r1 = train_gan(data, ae, small_gan(), {.epochs = 4, .seed = 5});
  const auto r2 = train_gan(data, ae, small_gan(), {.epochs = 4, .seed = 5});
  REQUIRE(r1.curve.size() == 4);
  CHECK_FALSE(r1.diverged);
  for (std::size_t e = 0; e < 4; ++e) {
    CHECK(r1.curve[e].l_g == r2.curve[e].l_g);
    CHECK(r1.curve[e].l_d == r2.curve[e].l_d);
    CHECK(r1.curve[e].l_ch == r2.curve[e].l_ch);
    CHECK(r1.curve[e].l_mse == r2.curve[e].l_mse);
  }

  auto pinned = ae;
  pinned.config.emb = 8;
  CHECK_THROWS_AS(train_gan(data, pinned, small_gan(), {.epochs = 1}), DataError);
  CHECK_THROWS_AS(train_gan({}, ae, small_gan(), {.epochs = 1}), DataError);
}

TEST_CASE("train_gan reports divergence with the last good parameters") {
  auto data = toy_samples(2, 64, 2);
  const auto ae = pointae::AEParams::init(small_ae(), 1);
  data[1].graph.node_features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const auto res = train_gan(data, ae, small_gan(), {.epochs = 3, .seed = 1});
  CHECK(res.diverged);
  CHECK(res.curve.empty());
  CHECK(res.message.find("epoch 1") != std::string::npos);
  const auto init = GeneratorParams::init(small_gan(), 16, 1);
  const auto a = res.generator.parameters();
  const auto b = init.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].second.value() == b[i].second.value());
}

TEST_CASE("train_gan drives the embedding error down on a toy corpus") {
  const auto data = toy_samples(10, 128, 3);
  std::vector<geometry::PointSet> clouds;
  for (const auto& s : data) clouds.push_back(s.cloud);
  auto ae_cfg = small_ae();
  ae_cfg.points = 128;
  const auto ae = pointae::train_ae(clouds, ae_cfg, {.epochs = 150, .seed = 2}).params;
  const auto res = train_gan(data, ae, small_gan(), {.epochs = 2000, .seed = 4});
  REQUIRE_FALSE(res.diverged);
  REQUIRE(res.curve.size() == 2000);
  double best = res.curve.front().l_mse;
  for (const auto& e : res.curve) best = std::min(best, e.l_mse);
  CHECK(res.curve.front().l_mse / best >= 10.0);
}

TEST_CASE("reconstruct contracts") {
  std::mt19937_64 rng(7);
  const auto ae = pointae::AEParams::init(small_ae(), 3);
  const auto g = GeneratorParams::init(small_gan(), 16, 4);
  const auto set = fixtures::random_set(4, 5, rng);
  const auto a = reconstruct(g, ae, set, 9);
  CHECK(a.rows() == 64);
  CHECK(a.allFinite());
  CHECK(reconstruct(g, ae, set, 9) == a);

  const auto graph = graphrep::build_graph(set);
  const auto noise = make_noise(graph.node_count(), g.config, 9);
  CHECK(reconstruct(g, ae, graph, noise) == a);
  const auto r = random_relabeling(4, 5, rng);
  const auto order = graphrep::permutation_node_order(graph, r.perm, r.shifts);
  const auto b = reconstruct(g, ae, graphrep::permute_graph(graph, r.perm, r.shifts), permute_noise(noise, order));
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6);
}
