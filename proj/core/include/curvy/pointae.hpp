#pragma once

#include <cstdint>
#include <vector>

#include "curvy/geometry.hpp"
#include "curvy/nn/layers.hpp"

namespace curvy::pointae {

using geometry::PointSet;

/// Latent code shared by the autoencoder and the generator, stored 1 x emb.
using Embedding = nn::Matrix;

struct AEConfig {
  std::size_t emb = 128;
  std::size_t points = 2048;  // decoder output count N
  std::vector<std::size_t> encoder_hidden = {64, 128};
  std::vector<std::size_t> decoder_hidden = {256, 512};
};

/// Shared per-point MLP with max-pool (encoder) and an MLP decoder whose
/// output is reshaped to N x 3.
struct AEParams {
  AEConfig config;
  std::vector<nn::DenseLayer> encoder;
  std::vector<nn::DenseLayer> decoder;

  static AEParams init(const AEConfig& config, std::uint64_t seed);
  nn::NamedParameters parameters() const;
  /// Deep copy; `trainable = false` yields constant tensors for frozen use.
  AEParams clone(bool trainable = true) const;
};

nn::Tensor encode(const AEParams& ae, const nn::Tensor& points);
nn::Tensor decode(const AEParams& ae, const nn::Tensor& embedding);

Embedding encode(const AEParams& ae, const PointSet& points);
PointSet decode(const AEParams& ae, const Embedding& embedding);

nn::Matrix to_matrix(const PointSet& points);
PointSet to_point_set(const nn::Matrix& m);

struct AETrainConfig {
  std::size_t epochs = 500;
  double lr = 1e-3;
  /// Learning rate follows a cosine from lr down to lr * final_lr_fraction.
  double final_lr_fraction = 0.05;
  /// Small minibatches keep the smoothed epoch curve monotone; single-sample steps do not.
  std::size_t batch_size = 4;
  std::uint64_t seed = 0;
};

struct AETrainResult {
  AEParams params;
  std::vector<double> losses;  // mean Chamfer per epoch
};

/// Minimizes chamfer(decode(encode(P)), P) over the dataset with Adam.
/// Throws DivergenceError when the loss becomes non-finite.
AETrainResult train_ae(const std::vector<PointSet>& clouds, const AEConfig& config,
                       const AETrainConfig& train);
/// Continues training from existing parameters.
AETrainResult train_ae(const std::vector<PointSet>& clouds, AEParams params, const AETrainConfig& train);

/// Moving average with the given window (shorter at the start).
std::vector<double> smooth(const std::vector<double>& values, std::size_t window);

}  // namespace curvy::pointae
