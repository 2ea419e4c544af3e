#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "curvy/geometry.hpp"

namespace curvy::geometry {

/// Parses ASCII OBJ `v` and `f` records. Other records are ignored, polygons
/// are fan-triangulated and negative (relative) indices are resolved.
TriangleMesh load_obj(const std::filesystem::path& path);
TriangleMesh parse_obj(const std::string& text, const std::string& source_name = "<memory>");

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

/// ASCII PLY with float x/y/z vertex properties. The optional seed is written
/// as a header comment.
std::string format_ply(const PointSet& points, std::optional<std::uint64_t> seed = std::nullopt);
void save_ply(const PointSet& points, const std::filesystem::path& path,
              std::optional<std::uint64_t> seed = std::nullopt);
PointSet load_ply(const std::filesystem::path& path);

}  // namespace curvy::geometry
