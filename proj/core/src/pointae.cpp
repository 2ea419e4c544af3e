#include "curvy/pointae.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "curvy/error.hpp"
#include "curvy/nn/optim.hpp"

namespace curvy::pointae {

AEParams AEParams::init(const AEConfig& config, std::uint64_t seed) {
  if (config.emb == 0 || config.points == 0) throw DataError("autoencoder sizes must be positive");
  std::mt19937_64 rng(seed);
  AEParams ae;
  ae.config = config;
  std::size_t width = 3;
  for (std::size_t h : config.encoder_hidden) {
    ae.encoder.push_back(nn::DenseLayer::init(width, h, rng));
    width = h;
  }
  ae.encoder.push_back(nn::DenseLayer::init(width, config.emb, rng));
  width = config.emb;
  for (std::size_t h : config.decoder_hidden) {
    ae.decoder.push_back(nn::DenseLayer::init(width, h, rng));
    width = h;
  }
  ae.decoder.push_back(nn::DenseLayer::init(width, 3 * config.points, rng));
  return ae;
}

nn::NamedParameters AEParams::parameters() const {
  nn::NamedParameters out;
  for (std::size_t i = 0; i < encoder.size(); ++i) encoder[i].collect("encoder." + std::to_string(i), out);
  for (std::size_t i = 0; i < decoder.size(); ++i) decoder[i].collect("decoder." + std::to_string(i), out);
  return out;
}

AEParams AEParams::clone(bool trainable) const {
  auto copy = [trainable](const nn::Tensor& t) {
    return trainable ? nn::Tensor::parameter(t.value()) : nn::Tensor::constant(t.value());
  };
  AEParams out;
  out.config = config;
  for (const auto& l : encoder) out.encoder.push_back({copy(l.W), copy(l.b)});
  for (const auto& l : decoder) out.decoder.push_back({copy(l.W), copy(l.b)});
  return out;
}

nn::Tensor encode(const AEParams& ae, const nn::Tensor& points) {
  if (points.rows() == 0) throw DataError("cannot encode an empty point cloud");
  if (points.cols() != 3) throw DataError("encoder expects n x 3 points");
  nn::Tensor h = points;
  for (std::size_t i = 0; i < ae.encoder.size(); ++i) {
    h = nn::dense_forward(ae.encoder[i], h);
    if (i + 1 < ae.encoder.size()) h = nn::relu(h);
  }
  return nn::col_max(h);
}

nn::Tensor decode(const AEParams& ae, const nn::Tensor& embedding) {
  if (embedding.rows() != 1 || embedding.cols() != ae.config.emb) {
    throw DataError("embedding length " + std::to_string(embedding.value().size()) +
                    " does not match autoencoder emb " + std::to_string(ae.config.emb));
  }
  nn::Tensor h = embedding;
  for (std::size_t i = 0; i < ae.decoder.size(); ++i) {
    h = nn::dense_forward(ae.decoder[i], h);
    if (i + 1 < ae.decoder.size()) h = nn::relu(h);
  }
  return nn::reshape(h, ae.config.points, 3);
}

nn::Matrix to_matrix(const PointSet& points) {
  nn::Matrix m(static_cast<std::size_t>(points.rows()), 3);
  std::copy_n(points.data(), m.size(), m.data());
  return m;
}

PointSet to_point_set(const nn::Matrix& m) {
  if (m.cols() != 3) throw DataError("point matrix must have three columns");
  PointSet p(static_cast<Eigen::Index>(m.rows()), 3);
  std::copy_n(m.data(), m.size(), p.data());
  return p;
}

Embedding encode(const AEParams& ae, const PointSet& points) {
  return encode(ae, nn::Tensor::constant(to_matrix(points))).value();
}

PointSet decode(const AEParams& ae, const Embedding& embedding) {
  return to_point_set(decode(ae, nn::Tensor::constant(embedding)).value());
}

AETrainResult train_ae(const std::vector<PointSet>& clouds, const AEConfig& config,
                       const AETrainConfig& train) {
  return train_ae(clouds, AEParams::init(config, train.seed), train);
}

AETrainResult train_ae(const std::vector<PointSet>& clouds, AEParams params, const AETrainConfig& train) {
  if (clouds.empty()) throw DataError("autoencoder training needs at least one cloud");
  for (const auto& c : clouds) {
    if (c.rows() == 0) throw DataError("autoencoder training cloud is empty");
  }
  AETrainResult result{std::move(params), {}};
  if (train.epochs == 0) return result;

  std::vector<nn::Tensor> tensors;
  for (auto& [name, t] : result.params.parameters()) tensors.push_back(t);
  nn::Adam adam(tensors, {.lr = train.lr});

  std::vector<nn::Tensor> inputs;
  for (const auto& c : clouds) inputs.push_back(nn::Tensor::constant(to_matrix(c)));

  std::mt19937_64 rng(train.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(clouds.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, train.batch_size);

  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    const double progress = train.epochs > 1 ? static_cast<double>(epoch) / (train.epochs - 1) : 0.0;
    const double floor = train.final_lr_fraction;
    adam.set_lr(train.lr * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress))));

    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      for (std::size_t i = start; i < stop; ++i) {
        const nn::Tensor& x = inputs[order[i]];
        const nn::Tensor loss = nn::chamfer_loss(decode(result.params, encode(result.params, x)), x);
        if (!std::isfinite(loss.item())) {
          throw DivergenceError("autoencoder loss became non-finite at epoch " + std::to_string(epoch + 1));
        }
        epoch_loss += loss.item();
        nn::backward(loss);
      }
      adam.step(1.0 / static_cast<double>(stop - start));
    }
    result.losses.push_back(epoch_loss / static_cast<double>(clouds.size()));
  }
  return result;
}

std::vector<double> smooth(const std::vector<double>& values, std::size_t window) {
  std::vector<double> out;
  out.reserve(values.size());
  double running = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    running += values[i];
    if (i >= window) running -= values[i - window];
    out.push_back(running / static_cast<double>(std::min(i + 1, window)));
  }
  return out;
}

}  // namespace curvy::pointae
