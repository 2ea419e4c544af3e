#include "curvy/gradsuite.hpp"

#include <random>

#include "curvy/curvygan.hpp"
#include "curvy/error.hpp"
#include "curvy/graphrep.hpp"
#include "curvy/nn/layers.hpp"
#include "curvy/nn/ops.hpp"
#include "curvy/pointae.hpp"

namespace curvy::gradsuite {

namespace {

using nn::Matrix;
using nn::Tensor;

Tensor random_param(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  return Tensor::parameter(nn::gaussian_init(r, c, scale, rng));
}

// Ring of n nodes with self-loops.
Matrix ring(std::size_t n) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 1.0;
    a(i, (i + 1) % n) = a((i + 1) % n, i) = 1.0;
  }
  return a;
}

// Two sections of three pieces each with random coefficients.
graphrep::CSGraph micro_graph(std::mt19937_64& rng) {
  splitfit::CrossSectionSet set;
  std::normal_distribution<double> normal(0.0, 0.3);
  for (int s = 0; s < 2; ++s) {
    splitfit::CrossSection cs;
    for (int j = 0; j < 3; ++j) {
      splitfit::Piece p;
      for (int r = 0; r < splitfit::kCoeffRows; ++r) {
        for (int c = 0; c < 3; ++c) p.coeffs(r, c) = normal(rng);
      }
      p.chord_span = 1.0;
      cs.pieces.push_back(p);
      cs.junctions.push_back(splitfit::Junction::kCorner);
    }
    set.sections.push_back(cs);
  }
  return graphrep::build_graph(set);
}

curvygan::GanConfig micro_config() {
  curvygan::GanConfig cfg;
  cfg.noise_dim = 2;
  cfg.hidden = 6;
  cfg.head_hidden = 6;
  cfg.diffnorm_groups = 2;
  cfg.diffnorm_lambda = 0.5;
  cfg.disc_hidden = 5;
  cfg.disc_head = {6, 4};
  return cfg;
}

std::vector<Tensor> tensors_of(const nn::NamedParameters& named) {
  std::vector<Tensor> out;
  for (const auto& [n, t] : named) out.push_back(t);
  return out;
}

nn::GradCheckReport run_case(const std::string& name, std::mt19937_64& rng) {
  if (name == "dense") {
    auto layer = nn::DenseLayer::init(3, 5, rng);
    layer.b = random_param(1, 5, rng);
    auto x = random_param(4, 3, rng);
    return nn::grad_check([&] { return nn::dense_forward(layer, x); }, {x, layer.W, layer.b});
  }
  if (name == "gcn") {
    auto x = random_param(5, 3, rng);
    auto w = random_param(3, 4, rng);
    const Matrix a = ring(5);
    return nn::grad_check([&] { return nn::square(nn::gcn_forward(x, a, w)); }, {x, w});
  }
  if (name == "sage") {
    auto x = random_param(5, 3, rng);
    auto layer = nn::SageLayer::init(3, 4, rng);
    const Matrix a = ring(5);
    return nn::grad_check([&] { return nn::square(layer.forward(x, a)); }, {x, layer.w_self, layer.w_neigh, layer.bias});
  }
  if (name == "gat") {
    auto x = random_param(5, 3, rng);
    auto layer = nn::GATLayer::init(3, 4, rng);
    const Matrix a = ring(5);
    return nn::grad_check([&] { return nn::square(nn::gat_forward(layer, x, a)); }, {x, layer.W, layer.a});
  }
  if (name == "diffnorm") {
    auto x = random_param(6, 3, rng);
    auto w = random_param(3, 4, rng);
    auto lambda = random_param(1, 1, rng);
    return nn::grad_check([&] { return nn::square(nn::diffnorm_forward(x, w, lambda)); }, {x, w, lambda});
  }
  if (name == "softmax") {
    auto x = random_param(4, 5, rng);
    auto y = random_param(4, 5, rng);
    return nn::grad_check([&] { return nn::softmax_rows(x) * y; }, {x});
  }
  if (name == "sigmoid") {
    auto x = random_param(4, 3, rng, 2.0);
    return nn::grad_check([&] { return nn::square(nn::sigmoid(x)); }, {x});
  }
  if (name == "leaky_relu") {
    auto x = random_param(4, 3, rng);
    return nn::grad_check([&] { return nn::square(nn::leaky_relu(x, 0.2)); }, {x});
  }
  if (name == "mse") {
    auto a = random_param(3, 4, rng);
    auto b = random_param(3, 4, rng);
    return nn::grad_check([&] { return nn::mse(a, b); }, {a, b});
  }
  if (name == "chamfer") {
    auto p = random_param(7, 3, rng);
    auto q = random_param(9, 3, rng);
    return nn::grad_check([&] { return nn::chamfer_loss(p, q); }, {p, q});
  }
  if (name == "segment_mean") {
    auto x = random_param(6, 3, rng);
    const std::vector<int> seg = {0, 0, 1, 1, 1, 2};
    return nn::grad_check([&] { return nn::square(nn::segment_mean(x, seg, 3)); }, {x});
  }
  if (name == "generator_loss" || name == "discriminator_loss") {
    const auto cfg = micro_config();
    pointae::AEConfig ae_cfg;
    ae_cfg.emb = 4;
    ae_cfg.points = 8;
    ae_cfg.encoder_hidden = {6};
    ae_cfg.decoder_hidden = {6};
    const auto ae = pointae::AEParams::init(ae_cfg, rng()).clone(false);
    const auto graph = curvygan::GraphInputs::from(micro_graph(rng));
    const auto g = curvygan::GeneratorParams::init(cfg, ae_cfg.emb, rng());
    const auto d = curvygan::DiscriminatorParams::init(cfg, ae_cfg.emb, rng());
    const auto noise = Tensor::constant(curvygan::make_noise(graph.features.rows(), cfg, rng));
    const auto real = Tensor::constant(nn::gaussian_init(1, ae_cfg.emb, 1.0, rng));
    const auto cloud = Tensor::constant(nn::gaussian_init(ae_cfg.points, 3, 0.5, rng));
    if (name == "generator_loss") {
      return nn::grad_check(
          [&] {
            const auto fake = curvygan::generate(g, graph, noise);
            return curvygan::generator_loss(d, ae, graph, fake, real, cloud, {},
                                            curvygan::AdversarialMode::kNonSaturating)
                .total;
          },
          tensors_of(g.parameters()));
    }
    const auto fake = Tensor::constant(nn::gaussian_init(1, ae_cfg.emb, 1.0, rng));
    return nn::grad_check(
        [&] { return curvygan::discriminator_loss(d, graph, real, fake, curvygan::DiscriminatorMode::kStandard); },
        tensors_of(d.parameters()));
  }
  throw UsageError("unknown gradient case " + name);
}

}  // namespace

std::vector<std::string> case_names() {
  return {"dense", "gcn",  "sage",    "gat",          "diffnorm",       "softmax",           "sigmoid",
          "leaky_relu", "mse", "chamfer", "segment_mean", "generator_loss", "discriminator_loss"};
}

std::vector<CaseResult> run(std::uint64_t seed, std::size_t instances, const std::string& only) {
  std::vector<CaseResult> out;
  bool matched = false;
  const auto names = case_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto& name = names[c];
    if (!only.empty() && name != only) continue;
    matched = true;
    for (std::size_t i = 0; i < instances; ++i) {
      std::mt19937_64 rng(seed + 1000003ull * i + 7919ull * c);
      out.push_back({name, i, run_case(name, rng)});
    }
  }
  if (!matched) throw UsageError("unknown gradient case " + only);
  return out;
}

}  // namespace curvy::gradsuite
