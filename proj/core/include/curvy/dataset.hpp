#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curvy/geometry.hpp"
#include "curvy/pipeline.hpp"
#include "curvy/splitfit.hpp"

// On-disk dataset layout:
//   index.json            format_version, seed, options, record ids
//   records/<id>.json     one DatasetRecord
//   points/<id>.ply       ground-truth surface samples
//   meshes/<id>.obj       normalized source mesh (for re-slicing)
namespace curvy::dataset {

inline constexpr int kFormatVersion = 1;

struct DatasetRecord {
  std::string shape_id;
  std::string class_label;
  splitfit::CrossSectionSet set;
  std::string gt_points_file;  // relative to the dataset root
  std::string mesh_file;       // relative to the dataset root, may be empty
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const geometry::Plane& plane);
geometry::Plane plane_from_json(const nlohmann::json& j);
nlohmann::json to_json(const splitfit::CrossSection& cs);
splitfit::CrossSection section_from_json(const nlohmann::json& j);
nlohmann::json to_json(const splitfit::CrossSectionSet& set);
splitfit::CrossSectionSet set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DatasetRecord& record);
DatasetRecord record_from_json(const nlohmann::json& j);

/// Pretty JSON with a trailing newline; floats use the shortest form that
/// round-trips exactly.
std::string dump(const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

DatasetRecord load_record(const std::filesystem::path& path);

struct Dataset {
  std::filesystem::path root;
  nlohmann::json index;
  std::vector<DatasetRecord> records;

  geometry::PointSet points(const DatasetRecord& record) const;
  geometry::TriangleMesh mesh(const DatasetRecord& record) const;
  std::vector<std::string> classes() const;  // sorted, unique
};

Dataset load(const std::filesystem::path& root);

struct ShapeSource {
  std::string id;
  std::string class_label;
  geometry::TriangleMesh mesh;
};

/// Finds <dir>/<class>/*.obj; `classes` filters when non-empty. Sorted by
/// class then file name.
std::vector<ShapeSource> scan_mesh_dir(const std::filesystem::path& dir,
                                       const std::vector<std::string>& classes);

struct BuildOptions {
  pipeline::SectionOptions sections;
  std::size_t points = 2048;
  std::uint64_t seed = 0;
};

struct BuildReport {
  std::size_t written = 0;
  std::vector<std::string> failures;  // "<id>: <message>"
};

/// Per-shape seed derived from the global seed and the shape id.
std::uint64_t shape_seed(std::uint64_t seed, const std::string& id);

/// Normalizes each mesh, slices, fits and samples it, and writes the layout
/// above. Shapes whose slicing fails are reported and skipped.
BuildReport build(const std::vector<ShapeSource>& shapes, const BuildOptions& options,
                  const std::filesystem::path& out_dir);

/// Cross sections and GT cloud for one normalized mesh, as `build` computes them.
DatasetRecord make_record(const ShapeSource& shape, const BuildOptions& options,
                          geometry::PointSet* cloud);

}  // namespace curvy::dataset
