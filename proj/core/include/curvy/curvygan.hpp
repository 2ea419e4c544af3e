#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvy/graphrep.hpp"
#include "curvy/nn/layers.hpp"
#include "curvy/pointae.hpp"

namespace curvy::curvygan {

using graphrep::CSGraph;

/// Widths are non-canonical defaults.
struct GanConfig {
  std::size_t noise_dim = 8;
  double noise_sigma = 1.0;
  std::size_t hidden = 64;       // SAGE / GAT width
  std::size_t head_hidden = 128; // generator FC
  std::size_t diffnorm_groups = 4;
  double diffnorm_lambda = 0.01;
  std::size_t disc_hidden = 64;
  std::vector<std::size_t> disc_head = {128, 64};
};

struct GeneratorParams {
  GanConfig config;
  std::size_t emb = 0;
  nn::SageLayer sage1, sage2;
  nn::DiffNormLayer norm1, norm2;
  nn::GATLayer local_gat, global_gat;
  nn::DenseLayer fc1, fc2;

  static GeneratorParams init(const GanConfig& config, std::size_t emb, std::uint64_t seed);
  nn::NamedParameters parameters() const;
  GeneratorParams clone() const;
};

struct DiscriminatorParams {
  GanConfig config;
  std::size_t emb = 0;
  nn::DenseLayer gcn1, gcn2;  // GCN weights with bias
  std::vector<nn::DenseLayer> head;

  static DiscriminatorParams init(const GanConfig& config, std::size_t emb, std::uint64_t seed);
  nn::NamedParameters parameters() const;
  DiscriminatorParams clone() const;
};

/// Graph matrices converted once for repeated forward passes.
struct GraphInputs {
  nn::Tensor features;  // n x 18
  nn::Matrix piece_adj;
  nn::Matrix section_adj;
  std::vector<int> membership;
  std::size_t sections = 0;

  static GraphInputs from(const CSGraph& graph);
};

nn::Matrix to_matrix(const graphrep::RowMatrix& m);

/// n x noise_dim Gaussian noise.
nn::Matrix make_noise(std::size_t nodes, const GanConfig& config, std::uint64_t seed);
nn::Matrix make_noise(std::size_t nodes, const GanConfig& config, std::mt19937_64& rng);

/// Returns a 1 x emb embedding.
nn::Tensor generate(const GeneratorParams& g, const GraphInputs& graph, const nn::Tensor& noise);
pointae::Embedding generate(const GeneratorParams& g, const CSGraph& graph, const nn::Matrix& noise);

/// Pre-sigmoid score.
nn::Tensor discriminator_logit(const DiscriminatorParams& d, const GraphInputs& graph,
                               const nn::Tensor& embedding);
/// D(e | graph) in (0, 1).
double discriminate(const DiscriminatorParams& d, const CSGraph& graph, const pointae::Embedding& e);

enum class AdversarialMode { kNonSaturating, kSaturating };
enum class DiscriminatorMode { kStandard, kPrintedVerbatim };

struct LossWeights {
  double adversarial = 1.0;
  double chamfer = 1.0;
  double mse = 1.0;
};

/// Generator adversarial term as a function of D(fake).
double adversarial_term(double d_fake, AdversarialMode mode);
/// Discriminator objective as a function of D(real), D(fake).
double discriminator_objective(double d_real, double d_fake, DiscriminatorMode mode);

struct GeneratorLoss {
  nn::Tensor total;
  double adversarial = 0.0;
  double chamfer = 0.0;
  double mse = 0.0;
};

/// adversarial(D(fake)) + w_ch * chamfer(De(fake), target_cloud) + w_mse * mse(fake, target_embedding).
/// `ae` must be frozen; `target_cloud` is De(En(P_gt)).
GeneratorLoss generator_loss(const DiscriminatorParams& d, const pointae::AEParams& ae,
                             const GraphInputs& graph, const nn::Tensor& fake,
                             const nn::Tensor& target_embedding, const nn::Tensor& target_cloud,
                             const LossWeights& weights, AdversarialMode mode);

/// Works on logits: standard form softplus(-z_real) + softplus(z_fake).
nn::Tensor discriminator_loss(const DiscriminatorParams& d, const GraphInputs& graph,
                              const nn::Tensor& real, const nn::Tensor& fake, DiscriminatorMode mode);

struct GanSample {
  CSGraph graph;
  geometry::PointSet cloud;  // P_gt
};

struct GanTrainConfig {
  std::size_t epochs = 2000;
  double lr_g = 1e-3;
  double lr_d = 1e-4;
  double final_lr_fraction = 0.05;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  LossWeights weights;
  AdversarialMode adversarial = AdversarialMode::kNonSaturating;
  DiscriminatorMode discriminator = DiscriminatorMode::kStandard;
};

struct EpochLosses {
  double l_g = 0.0;
  double l_d = 0.0;
  double l_ch = 0.0;
  double l_mse = 0.0;
  double adv_g = 0.0;
};

struct GanTrainResult {
  GeneratorParams generator;
  DiscriminatorParams discriminator;
  std::vector<EpochLosses> curve;
  bool diverged = false;
  std::string message;  // diagnostic when diverged
};

/// Alternating 1 D step / 1 G step per batch with fresh noise for every
/// sample and step. On divergence the last finished epoch's parameters are
/// returned with `diverged` set.
GanTrainResult train_gan(const std::vector<GanSample>& data, const pointae::AEParams& ae,
                         const GanConfig& config, const GanTrainConfig& train);
GanTrainResult train_gan(const std::vector<GanSample>& data, const pointae::AEParams& ae,
                         GeneratorParams g, DiscriminatorParams d, const GanTrainConfig& train);

/// decode(ae, generate(g, build_graph(set), noise(seed)))
geometry::PointSet reconstruct(const GeneratorParams& g, const pointae::AEParams& ae,
                               const splitfit::CrossSectionSet& set, std::uint64_t seed);
geometry::PointSet reconstruct(const GeneratorParams& g, const pointae::AEParams& ae,
                               const CSGraph& graph, const nn::Matrix& noise);

}  // namespace curvy::curvygan
