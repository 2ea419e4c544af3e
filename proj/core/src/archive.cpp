#include "curvy/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "curvy/error.hpp"

namespace curvy::archive {

using nlohmann::json;

namespace {

void put_f64(std::vector<unsigned char>& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xffu));
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::size_t> sizes(const json& j) { return j.get<std::vector<std::size_t>>(); }

}  // namespace

const nn::Matrix& WeightArchive::at(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return m;
  }
  throw DataError("archive has no tensor named " + name);
}

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path manifest_path(const std::filesystem::path& path) {
  if (path.has_extension()) return path;
  std::filesystem::path p = path;
  p += ".json";
  return p;
}

std::filesystem::path blob_path(const std::filesystem::path& path) {
  return std::filesystem::path(manifest_path(path)).replace_extension(".bin");
}

json manifest(const WeightArchive& archive) {
  json tensors = json::array();
  std::set<std::string> names;
  std::uint64_t offset = 0;
  for (const auto& [name, m] : archive.tensors) {
    if (!names.insert(name).second) throw DataError("duplicate tensor name " + name);
    tensors.push_back({{"name", name},
                       {"shape", {m.rows(), m.cols()}},
                       {"dtype", "f64"},
                       {"byte_offset", offset}});
    offset += 8 * m.size();
  }
  return {{"format_version", kFormatVersion},
          {"seed", archive.seed},
          {"config_hash", config_hash(archive.config)},
          {"config", archive.config},
          {"blob_bytes", offset},
          {"tensors", tensors}};
}

std::vector<unsigned char> blob(const WeightArchive& archive) {
  std::vector<unsigned char> out;
  for (const auto& [name, m] : archive.tensors) {
    for (double v : m.values()) put_f64(out, v);
  }
  return out;
}

void save(const WeightArchive& archive, const std::filesystem::path& path) {
  const json man = manifest(archive);
  const auto bytes = blob(archive);
  json with_blob = man;
  with_blob["blob"] = blob_path(path).filename().string();
  write_file(manifest_path(path), with_blob.dump(2) + "\n");
  write_file(blob_path(path), std::string(bytes.begin(), bytes.end()));
}

WeightArchive load(const std::filesystem::path& path) {
  const auto mpath = manifest_path(path);
  json man;
  try {
    man = json::parse(read_file(mpath));
  } catch (const json::exception& e) {
    throw DataError(mpath.string() + ": " + e.what());
  }
  try {
    if (man.at("format_version").get<int>() != kFormatVersion) {
      throw DataError(mpath.string() + ": unsupported format_version");
    }
    WeightArchive archive;
    archive.seed = man.at("seed").get<std::uint64_t>();
    archive.config = man.at("config");
    if (config_hash(archive.config) != man.at("config_hash").get<std::string>()) {
      throw DataError(mpath.string() + ": config_hash does not match config");
    }
    const std::string bytes = read_file(blob_path(path));
    std::uint64_t expected = 0;
    for (const auto& t : man.at("tensors")) {
      if (t.at("dtype").get<std::string>() != "f64") throw DataError(mpath.string() + ": dtype must be f64");
      const auto shape = sizes(t.at("shape"));
      if (shape.size() != 2) throw DataError(mpath.string() + ": tensors must be 2-D");
      const auto offset = t.at("byte_offset").get<std::uint64_t>();
      if (offset != expected) throw DataError(mpath.string() + ": tensors are not contiguous");
      nn::Matrix m(shape[0], shape[1]);
      expected += 8 * m.size();
      if (expected > bytes.size()) throw DataError(blob_path(path).string() + ": blob is truncated");
      const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + offset;
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = get_f64(p + 8 * i);
      archive.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
    }
    if (expected != bytes.size()) throw DataError(blob_path(path).string() + ": blob length mismatch");
    return archive;
  } catch (const json::exception& e) {
    throw DataError(mpath.string() + ": " + e.what());
  }
}

WeightArchive from_parameters(const nn::NamedParameters& params, std::uint64_t seed, json config) {
  WeightArchive archive;
  archive.seed = seed;
  archive.config = std::move(config);
  for (const auto& [name, t] : params) archive.tensors.emplace_back(name, t.value());
  return archive;
}

void assign(const WeightArchive& archive, const nn::NamedParameters& params) {
  if (archive.tensors.size() != params.size()) {
    throw DataError("archive holds " + std::to_string(archive.tensors.size()) + " tensors, model expects " +
                    std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, value] = archive.tensors[i];
    auto t = params[i].second;
    if (name != params[i].first) throw DataError("archive tensor " + name + " where " + params[i].first + " expected");
    if (!value.same_shape(t.value())) throw DataError("shape mismatch for tensor " + name);
    t.mutable_value() = value;
  }
}

// ---------------------------------------------------------------------------

json to_json(const pointae::AEConfig& c) {
  return {{"emb", c.emb}, {"points", c.points}, {"encoder_hidden", c.encoder_hidden},
          {"decoder_hidden", c.decoder_hidden}};
}

pointae::AEConfig ae_config_from_json(const json& j) {
  pointae::AEConfig c;
  c.emb = j.value("emb", c.emb);
  c.points = j.value("points", c.points);
  c.encoder_hidden = j.value("encoder_hidden", c.encoder_hidden);
  c.decoder_hidden = j.value("decoder_hidden", c.decoder_hidden);
  return c;
}

json to_json(const curvygan::GanConfig& c) {
  return {{"noise_dim", c.noise_dim},
          {"noise_sigma", c.noise_sigma},
          {"hidden", c.hidden},
          {"head_hidden", c.head_hidden},
          {"diffnorm_groups", c.diffnorm_groups},
          {"diffnorm_lambda", c.diffnorm_lambda},
          {"disc_hidden", c.disc_hidden},
          {"disc_head", c.disc_head}};
}

curvygan::GanConfig gan_config_from_json(const json& j) {
  curvygan::GanConfig c;
  c.noise_dim = j.value("noise_dim", c.noise_dim);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.hidden = j.value("hidden", c.hidden);
  c.head_hidden = j.value("head_hidden", c.head_hidden);
  c.diffnorm_groups = j.value("diffnorm_groups", c.diffnorm_groups);
  c.diffnorm_lambda = j.value("diffnorm_lambda", c.diffnorm_lambda);
  c.disc_hidden = j.value("disc_hidden", c.disc_hidden);
  c.disc_head = j.value("disc_head", c.disc_head);
  return c;
}

WeightArchive ae_archive(const pointae::AEParams& ae, std::uint64_t seed) {
  return from_parameters(ae.parameters(), seed, {{"model", "autoencoder"}, {"autoencoder", to_json(ae.config)}});
}

pointae::AEParams ae_from_archive(const WeightArchive& archive) {
  if (archive.config.value("model", "") != "autoencoder") throw DataError("archive does not hold an autoencoder");
  auto ae = pointae::AEParams::init(ae_config_from_json(archive.config.at("autoencoder")), 0);
  assign(archive, ae.parameters());
  return ae;
}

WeightArchive gan_archive(const curvygan::GeneratorParams& g, const curvygan::DiscriminatorParams& d,
                          std::uint64_t seed) {
  nn::NamedParameters params = g.parameters();
  for (auto& p : d.parameters()) params.push_back(p);
  return from_parameters(params, seed, {{"model", "curvygan"}, {"emb", g.emb}, {"gan", to_json(g.config)}});
}

GanModel gan_from_archive(const WeightArchive& archive) {
  if (archive.config.value("model", "") != "curvygan") throw DataError("archive does not hold a generator");
  const auto cfg = gan_config_from_json(archive.config.at("gan"));
  const auto emb = archive.config.at("emb").get<std::size_t>();
  GanModel model{curvygan::GeneratorParams::init(cfg, emb, 0), curvygan::DiscriminatorParams::init(cfg, emb, 0)};
  nn::NamedParameters params = model.generator.parameters();
  for (auto& p : model.discriminator.parameters()) params.push_back(p);
  assign(archive, params);
  return model;
}

}  // namespace curvy::archive
