#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvy/nn/gradcheck.hpp"

// Finite-difference checks over every layer and both GAN losses.
namespace curvy::gradsuite {

struct CaseResult {
  std::string name;
  std::size_t instance = 0;
  nn::GradCheckReport report;
};

inline constexpr double kTolerance = 1e-5;

/// Cases: dense, gcn, sage, gat, diffnorm, softmax, sigmoid, leaky_relu,
/// mse, chamfer, segment_mean, generator_loss, discriminator_loss.
std::vector<std::string> case_names();

/// Runs `instances` random instances of each case (or only `only` when set).
std::vector<CaseResult> run(std::uint64_t seed, std::size_t instances = 3, const std::string& only = "");

}  // namespace curvy::gradsuite
