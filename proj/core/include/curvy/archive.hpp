#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "curvy/curvygan.hpp"
#include "curvy/nn/layers.hpp"
#include "curvy/pointae.hpp"

// Named-tensor weight archives: a JSON manifest next to a raw little-endian
// f64 blob holding the tensors in manifest order.
namespace curvy::archive {

inline constexpr int kFormatVersion = 1;

struct WeightArchive {
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::pair<std::string, nn::Matrix>> tensors;

  const nn::Matrix& at(const std::string& name) const;
};

/// 64-bit FNV-1a of the compact config dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// `manifest` gets a .json extension if it has none; the blob is written next
/// to it with the extension replaced by .bin.
std::filesystem::path manifest_path(const std::filesystem::path& path);
std::filesystem::path blob_path(const std::filesystem::path& path);

nlohmann::json manifest(const WeightArchive& archive);
std::vector<unsigned char> blob(const WeightArchive& archive);

void save(const WeightArchive& archive, const std::filesystem::path& path);
WeightArchive load(const std::filesystem::path& path);

WeightArchive from_parameters(const nn::NamedParameters& params, std::uint64_t seed,
                              nlohmann::json config);
/// Copies archived values into `params`; names and shapes must match.
void assign(const WeightArchive& archive, const nn::NamedParameters& params);

// ---------------------------------------------------------------------------
// Model configs and model archives

nlohmann::json to_json(const pointae::AEConfig& config);
pointae::AEConfig ae_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const curvygan::GanConfig& config);
curvygan::GanConfig gan_config_from_json(const nlohmann::json& j);

WeightArchive ae_archive(const pointae::AEParams& ae, std::uint64_t seed);
pointae::AEParams ae_from_archive(const WeightArchive& archive);

struct GanModel {
  curvygan::GeneratorParams generator;
  curvygan::DiscriminatorParams discriminator;
};

WeightArchive gan_archive(const curvygan::GeneratorParams& g, const curvygan::DiscriminatorParams& d,
                          std::uint64_t seed);
GanModel gan_from_archive(const WeightArchive& archive);

}  // namespace curvy::archive
