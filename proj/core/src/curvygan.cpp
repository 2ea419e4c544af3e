#include "curvy/curvygan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "curvy/error.hpp"
#include "curvy/nn/optim.hpp"

namespace curvy::curvygan {

namespace {

nn::DenseLayer copy_layer(const nn::DenseLayer& l) {
  return {nn::Tensor::parameter(l.W.value()), nn::Tensor::parameter(l.b.value())};
}

nn::Tensor copy_tensor(const nn::Tensor& t) { return nn::Tensor::parameter(t.value()); }

double cosine_lr(double base, double floor, std::size_t epoch, std::size_t epochs) {
  const double progress = epochs > 1 ? static_cast<double>(epoch) / (epochs - 1) : 0.0;
  return base * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

std::vector<nn::Tensor> tensors_of(const nn::NamedParameters& named) {
  std::vector<nn::Tensor> out;
  for (const auto& [name, t] : named) out.push_back(t);
  return out;
}

}  // namespace

GeneratorParams GeneratorParams::init(const GanConfig& config, std::size_t emb, std::uint64_t seed) {
  if (emb == 0) throw DataError("generator embedding size must be positive");
  std::mt19937_64 rng(seed);
  const std::size_t in = graphrep::kFeatureDim + config.noise_dim;
  const std::size_t h = config.hidden;
  GeneratorParams g;
  g.config = config;
  g.emb = emb;
  g.sage1 = nn::SageLayer::init(in, h, rng);
  g.norm1 = nn::DiffNormLayer::init(h, config.diffnorm_groups, config.diffnorm_lambda, rng);
  g.sage2 = nn::SageLayer::init(h, h, rng);
  g.norm2 = nn::DiffNormLayer::init(h, config.diffnorm_groups, config.diffnorm_lambda, rng);
  g.local_gat = nn::GATLayer::init(h, h, rng);
  g.global_gat = nn::GATLayer::init(h, h, rng);
  g.fc1 = nn::DenseLayer::init(h, config.head_hidden, rng);
  g.fc2 = nn::DenseLayer::init(config.head_hidden, emb, rng);
  return g;
}

nn::NamedParameters GeneratorParams::parameters() const {
  nn::NamedParameters out;
  sage1.collect("generator.sage1", out);
  norm1.collect("generator.norm1", out);
  sage2.collect("generator.sage2", out);
  norm2.collect("generator.norm2", out);
  local_gat.collect("generator.local_gat", out);
  global_gat.collect("generator.global_gat", out);
  fc1.collect("generator.fc1", out);
  fc2.collect("generator.fc2", out);
  return out;
}

GeneratorParams GeneratorParams::clone() const {
  GeneratorParams g = *this;
  g.sage1 = {copy_tensor(sage1.w_self), copy_tensor(sage1.w_neigh), copy_tensor(sage1.bias)};
  g.sage2 = {copy_tensor(sage2.w_self), copy_tensor(sage2.w_neigh), copy_tensor(sage2.bias)};
  g.norm1 = {copy_tensor(norm1.w_assign), copy_tensor(norm1.lambda)};
  g.norm2 = {copy_tensor(norm2.w_assign), copy_tensor(norm2.lambda)};
  g.local_gat.W = copy_tensor(local_gat.W);
  g.local_gat.a = copy_tensor(local_gat.a);
  g.global_gat.W = copy_tensor(global_gat.W);
  g.global_gat.a = copy_tensor(global_gat.a);
  g.fc1 = copy_layer(fc1);
  g.fc2 = copy_layer(fc2);
  return g;
}

DiscriminatorParams DiscriminatorParams::init(const GanConfig& config, std::size_t emb,
                                              std::uint64_t seed) {
  if (emb == 0) throw DataError("discriminator embedding size must be positive");
  std::mt19937_64 rng(seed);
  DiscriminatorParams d;
  d.config = config;
  d.emb = emb;
  d.gcn1 = nn::DenseLayer::init(graphrep::kFeatureDim, config.disc_hidden, rng);
  d.gcn2 = nn::DenseLayer::init(config.disc_hidden, config.disc_hidden, rng);
  std::size_t width = config.disc_hidden + emb;
  for (std::size_t h : config.disc_head) {
    d.head.push_back(nn::DenseLayer::init(width, h, rng));
    width = h;
  }
  d.head.push_back(nn::DenseLayer::init(width, 1, rng));
  return d;
}

nn::NamedParameters DiscriminatorParams::parameters() const {
  nn::NamedParameters out;
  gcn1.collect("discriminator.gcn1", out);
  gcn2.collect("discriminator.gcn2", out);
  for (std::size_t i = 0; i < head.size(); ++i) head[i].collect("discriminator.head" + std::to_string(i), out);
  return out;
}

DiscriminatorParams DiscriminatorParams::clone() const {
  DiscriminatorParams d = *this;
  d.gcn1 = copy_layer(gcn1);
  d.gcn2 = copy_layer(gcn2);
  for (auto& l : d.head) l = copy_layer(l);
  return d;
}

nn::Matrix to_matrix(const graphrep::RowMatrix& m) {
  nn::Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  std::copy_n(m.data(), out.size(), out.data());
  return out;
}

GraphInputs GraphInputs::from(const CSGraph& graph) {
  if (graph.node_count() == 0) throw DataError("graph has no nodes");
  GraphInputs in;
  in.features = nn::Tensor::constant(to_matrix(graph.node_features));
  in.piece_adj = to_matrix(graph.piece_adj);
  in.section_adj = to_matrix(graph.section_adj);
  in.membership = graph.section_membership;
  in.sections = graph.section_count();
  return in;
}

nn::Matrix make_noise(std::size_t nodes, const GanConfig& config, std::mt19937_64& rng) {
  return nn::gaussian_init(nodes, config.noise_dim, config.noise_sigma, rng);
}

nn::Matrix make_noise(std::size_t nodes, const GanConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return make_noise(nodes, config, rng);
}

nn::Tensor generate(const GeneratorParams& g, const GraphInputs& graph, const nn::Tensor& noise) {
  const std::size_t n = graph.features.rows();
  if (noise.rows() != n || noise.cols() != g.config.noise_dim) {
    throw DataError("noise must be " + std::to_string(n) + " x " + std::to_string(g.config.noise_dim));
  }
  nn::Tensor x = nn::concat_cols({graph.features, noise});
  x = nn::relu(g.norm1.forward(g.sage1.forward(x, graph.piece_adj)));
  x = nn::relu(g.norm2.forward(g.sage2.forward(x, graph.piece_adj)));
  x = nn::relu(nn::gat_forward(g.local_gat, x, graph.piece_adj));
  // piece level -> section level; adjacency becomes the complete graph
  nn::Tensor s = nn::segment_mean(x, graph.membership, graph.sections);
  s = nn::relu(nn::gat_forward(g.global_gat, s, graph.section_adj));
  nn::Tensor v = nn::col_mean(s);
  v = nn::relu(nn::dense_forward(g.fc1, v));
  return nn::dense_forward(g.fc2, v);
}

pointae::Embedding generate(const GeneratorParams& g, const CSGraph& graph, const nn::Matrix& noise) {
  return generate(g, GraphInputs::from(graph), nn::Tensor::constant(noise)).value();
}

nn::Tensor discriminator_logit(const DiscriminatorParams& d, const GraphInputs& graph,
                               const nn::Tensor& embedding) {
  if (embedding.rows() != 1 || embedding.cols() != d.emb) {
    throw DataError("discriminator expects a 1 x " + std::to_string(d.emb) + " embedding");
  }
  nn::Tensor h = nn::relu(nn::gcn_forward(graph.features, graph.piece_adj, d.gcn1.W) + d.gcn1.b);
  h = nn::relu(nn::gcn_forward(h, graph.piece_adj, d.gcn2.W) + d.gcn2.b);
  nn::Tensor z = nn::concat_cols({nn::col_mean(h), embedding});
  for (std::size_t i = 0; i < d.head.size(); ++i) {
    z = nn::dense_forward(d.head[i], z);
    if (i + 1 < d.head.size()) z = nn::leaky_relu(z, 0.2);
  }
  return z;
}

double discriminate(const DiscriminatorParams& d, const CSGraph& graph, const pointae::Embedding& e) {
  const double z = discriminator_logit(d, GraphInputs::from(graph), nn::Tensor::constant(e)).item();
  return 1.0 / (1.0 + std::exp(-z));
}

double adversarial_term(double d_fake, AdversarialMode mode) {
  return mode == AdversarialMode::kSaturating ? std::log(1.0 - d_fake) : -std::log(d_fake);
}

double discriminator_objective(double d_real, double d_fake, DiscriminatorMode mode) {
  if (mode == DiscriminatorMode::kPrintedVerbatim) return (1.0 - std::log(d_fake)) + std::log(d_real);
  return -std::log(d_real) - std::log(1.0 - d_fake);
}

GeneratorLoss generator_loss(const DiscriminatorParams& d, const pointae::AEParams& ae,
                             const GraphInputs& graph, const nn::Tensor& fake,
                             const nn::Tensor& target_embedding, const nn::Tensor& target_cloud,
                             const LossWeights& weights, AdversarialMode mode) {
  const nn::Tensor z = discriminator_logit(d, graph, fake);
  // log(1 - sigmoid(z)) = -softplus(z); -log sigmoid(z) = softplus(-z)
  const nn::Tensor adv = mode == AdversarialMode::kSaturating ? -nn::softplus(z) : nn::softplus(-z);
  const nn::Tensor ch = nn::chamfer_loss(pointae::decode(ae, fake), target_cloud);
  const nn::Tensor ms = nn::mse(fake, target_embedding);
  GeneratorLoss out;
  out.total = weights.adversarial * adv + weights.chamfer * ch + weights.mse * ms;
  out.adversarial = adv.item();
  out.chamfer = ch.item();
  out.mse = ms.item();
  return out;
}

nn::Tensor discriminator_loss(const DiscriminatorParams& d, const GraphInputs& graph,
                              const nn::Tensor& real, const nn::Tensor& fake, DiscriminatorMode mode) {
  const nn::Tensor zr = discriminator_logit(d, graph, real);
  const nn::Tensor zf = discriminator_logit(d, graph, fake);
  if (mode == DiscriminatorMode::kPrintedVerbatim) {
    // (1 - log D(fake)) + log D(real)
    return (nn::softplus(-zf) + 1.0) - nn::softplus(-zr);
  }
  return nn::softplus(-zr) + nn::softplus(zf);
}

GanTrainResult train_gan(const std::vector<GanSample>& data, const pointae::AEParams& ae,
                         const GanConfig& config, const GanTrainConfig& train) {
  return train_gan(data, ae, GeneratorParams::init(config, ae.config.emb, train.seed),
                   DiscriminatorParams::init(config, ae.config.emb, train.seed + 1), train);
}

GanTrainResult train_gan(const std::vector<GanSample>& data, const pointae::AEParams& ae,
                         GeneratorParams g, DiscriminatorParams d, const GanTrainConfig& train) {
  if (data.empty()) throw DataError("GAN training needs at least one sample");
  if (g.emb != ae.config.emb || d.emb != ae.config.emb) {
    throw DataError("generator/discriminator embedding size does not match the autoencoder");
  }
  GanTrainResult result{std::move(g), std::move(d), {}, false, {}};
  if (train.epochs == 0) return result;

  const pointae::AEParams frozen = ae.clone(false);
  std::vector<GraphInputs> graphs;
  std::vector<nn::Tensor> target_emb, target_cloud;
  for (const auto& s : data) {
    graphs.push_back(GraphInputs::from(s.graph));
    const nn::Tensor e = pointae::encode(frozen, nn::Tensor::constant(pointae::to_matrix(s.cloud)));
    target_emb.push_back(nn::Tensor::constant(e.value()));
    target_cloud.push_back(nn::Tensor::constant(pointae::decode(frozen, e).value()));
  }

  nn::Adam opt_g(tensors_of(result.generator.parameters()), {.lr = train.lr_g});
  nn::Adam opt_d(tensors_of(result.discriminator.parameters()), {.lr = train.lr_d});
  std::mt19937_64 rng(train.seed ^ 0x5851f42d4c957f2dull);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, train.batch_size);
  const GanConfig& cfg = result.generator.config;

  GeneratorParams good_g = result.generator.clone();
  DiscriminatorParams good_d = result.discriminator.clone();

  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    opt_g.set_lr(cosine_lr(train.lr_g, train.final_lr_fraction, epoch, train.epochs));
    opt_d.set_lr(cosine_lr(train.lr_d, train.final_lr_fraction, epoch, train.epochs));
    std::shuffle(order.begin(), order.end(), rng);
    EpochLosses sums;
    try {
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t stop = std::min(order.size(), start + batch);
        const double scale = 1.0 / static_cast<double>(stop - start);

        opt_d.zero_grad();
        for (std::size_t i = start; i < stop; ++i) {
          const std::size_t s = order[i];
          const nn::Tensor noise = nn::Tensor::constant(make_noise(graphs[s].features.rows(), cfg, rng));
          const nn::Tensor fake = nn::detach(generate(result.generator, graphs[s], noise));
          const nn::Tensor ld =
              discriminator_loss(result.discriminator, graphs[s], target_emb[s], fake, train.discriminator);
          if (!std::isfinite(ld.item())) throw DivergenceError("discriminator loss became non-finite");
          sums.l_d += ld.item();
          nn::backward(ld);
        }
        opt_d.step(scale);

        opt_g.zero_grad();
        for (std::size_t i = start; i < stop; ++i) {
          const std::size_t s = order[i];
          const nn::Tensor noise = nn::Tensor::constant(make_noise(graphs[s].features.rows(), cfg, rng));
          const nn::Tensor fake = generate(result.generator, graphs[s], noise);
          const GeneratorLoss lg = generator_loss(result.discriminator, frozen, graphs[s], fake, target_emb[s],
                                                  target_cloud[s], train.weights, train.adversarial);
          if (!std::isfinite(lg.total.item())) throw DivergenceError("generator loss became non-finite");
          sums.l_g += lg.total.item();
          sums.l_ch += lg.chamfer;
          sums.l_mse += lg.mse;
          sums.adv_g += lg.adversarial;
          nn::backward(lg.total);
        }
        opt_g.step(scale);
        // the generator pass also reached discriminator parameters
        opt_d.zero_grad();
      }
    } catch (const DivergenceError& e) {
      result.generator = std::move(good_g);
      result.discriminator = std::move(good_d);
      result.diverged = true;
      result.message = std::string(e.what()) + " at epoch " + std::to_string(epoch + 1) +
                       "; returning parameters from epoch " + std::to_string(epoch);
      return result;
    }
    const double n = static_cast<double>(data.size());
    result.curve.push_back({sums.l_g / n, sums.l_d / n, sums.l_ch / n, sums.l_mse / n, sums.adv_g / n});
    good_g = result.generator.clone();
    good_d = result.discriminator.clone();
  }
  return result;
}

geometry::PointSet reconstruct(const GeneratorParams& g, const pointae::AEParams& ae, const CSGraph& graph,
                               const nn::Matrix& noise) {
  return pointae::decode(ae, generate(g, graph, noise));
}

geometry::PointSet reconstruct(const GeneratorParams& g, const pointae::AEParams& ae,
                               const splitfit::CrossSectionSet& set, std::uint64_t seed) {
  const CSGraph graph = graphrep::build_graph(set);
  return reconstruct(g, ae, graph, make_noise(graph.node_count(), g.config, seed));
}

}  // namespace curvy::curvygan
