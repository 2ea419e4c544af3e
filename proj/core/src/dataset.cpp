#include "curvy/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

#include "curvy/error.hpp"
#include "curvy/mesh_io.hpp"

namespace curvy::dataset {

using nlohmann::json;

json to_json(const geometry::Plane& plane) {
  return {{"normal", {plane.normal.x(), plane.normal.y(), plane.normal.z()}}, {"offset", plane.offset}};
}

geometry::Plane plane_from_json(const json& j) {
  const auto n = j.at("normal").get<std::vector<double>>();
  if (n.size() != 3) throw DataError("plane normal must have 3 entries");
  geometry::Plane p;
  p.normal = geometry::Vec3(n[0], n[1], n[2]);
  p.offset = j.at("offset").get<double>();
  if (std::abs(p.normal.norm() - 1.0) > 1e-9) throw DataError("plane normal is not unit length");
  return p;
}

json to_json(const splitfit::CrossSection& cs) {
  json pieces = json::array();
  json spans = json::array();
  for (const auto& piece : cs.pieces) {
    json rows = json::array();
    for (int r = 0; r < splitfit::kCoeffRows; ++r) {
      rows.push_back({piece.coeffs(r, 0), piece.coeffs(r, 1), piece.coeffs(r, 2)});
    }
    pieces.push_back(std::move(rows));
    spans.push_back(piece.chord_span);
  }
  json junctions = json::array();
  for (auto j : cs.junctions) junctions.push_back(j == splitfit::Junction::kSmooth ? "smooth" : "corner");
  return {{"plane", to_json(cs.plane)}, {"pieces", pieces}, {"chord_spans", spans}, {"junctions", junctions}};
}

splitfit::CrossSection section_from_json(const json& j) {
  splitfit::CrossSection cs;
  cs.plane = plane_from_json(j.at("plane"));
  const auto& pieces = j.at("pieces");
  for (const auto& rows : pieces) {
    if (!rows.is_array() || rows.size() != splitfit::kCoeffRows) {
      throw DataError("coefficient arrays must be 6 x 3");
    }
    splitfit::Piece piece;
    for (int r = 0; r < splitfit::kCoeffRows; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (!row.is_array() || row.size() != 3) throw DataError("coefficient arrays must be 6 x 3");
      for (int c = 0; c < 3; ++c) piece.coeffs(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    cs.pieces.push_back(piece);
  }
  if (j.contains("chord_spans")) {
    const auto spans = j.at("chord_spans").get<std::vector<double>>();
    if (spans.size() != cs.pieces.size()) throw DataError("chord_spans length differs from piece count");
    for (std::size_t i = 0; i < spans.size(); ++i) cs.pieces[i].chord_span = spans[i];
  }
  if (j.contains("junctions")) {
    for (const auto& s : j.at("junctions")) {
      const auto name = s.get<std::string>();
      if (name != "smooth" && name != "corner") throw DataError("unknown junction kind " + name);
      cs.junctions.push_back(name == "smooth" ? splitfit::Junction::kSmooth : splitfit::Junction::kCorner);
    }
    if (cs.junctions.size() != cs.pieces.size()) throw DataError("junctions length differs from piece count");
  } else {
    cs.junctions.assign(cs.pieces.size(), splitfit::Junction::kCorner);
  }
  if (cs.pieces.size() < 2) throw DataError("a cross-section needs at least 2 pieces");
  return cs;
}

json to_json(const splitfit::CrossSectionSet& set) {
  json out = json::array();
  for (const auto& cs : set.sections) out.push_back(to_json(cs));
  return out;
}

splitfit::CrossSectionSet set_from_json(const json& j) {
  splitfit::CrossSectionSet set;
  for (const auto& cs : j) set.sections.push_back(section_from_json(cs));
  set.validate();
  return set;
}

json to_json(const DatasetRecord& r) {
  return {{"format_version", kFormatVersion},
          {"shape_id", r.shape_id},
          {"class_label", r.class_label},
          {"seed", r.seed},
          {"k", r.set.k()},
          {"cross_sections", to_json(r.set)},
          {"gt_points_file", r.gt_points_file},
          {"mesh_file", r.mesh_file}};
}

DatasetRecord record_from_json(const json& j) {
  try {
    DatasetRecord r;
    r.shape_id = j.at("shape_id").get<std::string>();
    r.class_label = j.at("class_label").get<std::string>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.set = set_from_json(j.at("cross_sections"));
    r.gt_points_file = j.value("gt_points_file", "");
    r.mesh_file = j.value("mesh_file", "");
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // write-then-rename so a reader never sees a partial file
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

DatasetRecord load_record(const std::filesystem::path& path) {
  try {
    return record_from_json(read_json(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

geometry::PointSet Dataset::points(const DatasetRecord& record) const {
  if (record.gt_points_file.empty()) throw DataError("record " + record.shape_id + " has no point file");
  return geometry::load_ply(root / record.gt_points_file);
}

geometry::TriangleMesh Dataset::mesh(const DatasetRecord& record) const {
  if (record.mesh_file.empty()) throw DataError("record " + record.shape_id + " has no mesh file");
  return geometry::load_obj(root / record.mesh_file);
}

std::vector<std::string> Dataset::classes() const {
  std::set<std::string> s;
  for (const auto& r : records) s.insert(r.class_label);
  return {s.begin(), s.end()};
}

Dataset load(const std::filesystem::path& root) {
  Dataset ds;
  ds.root = root;
  ds.index = read_json(root / "index.json");
  try {
    for (const auto& id : ds.index.at("records")) {
      ds.records.push_back(load_record(root / "records" / (id.get<std::string>() + ".json")));
    }
  } catch (const json::exception& e) {
    throw DataError((root / "index.json").string() + ": " + e.what());
  }
  if (ds.records.empty()) throw DataError(root.string() + ": dataset has no records");
  return ds;
}

std::vector<ShapeSource> scan_mesh_dir(const std::filesystem::path& dir, const std::vector<std::string>& classes) {
  if (!std::filesystem::is_directory(dir)) throw DataError("mesh directory not found: " + dir.string());
  std::vector<std::filesystem::path> class_dirs;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_directory()) continue;
    const auto name = e.path().filename().string();
    if (!classes.empty() && std::find(classes.begin(), classes.end(), name) == classes.end()) continue;
    class_dirs.push_back(e.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  std::vector<ShapeSource> out;
  for (const auto& cdir : class_dirs) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(cdir)) {
      if (e.is_regular_file() && e.path().extension() == ".obj") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string cls = cdir.filename().string();
      out.push_back({cls + "_" + f.stem().string(), cls, geometry::load_obj(f)});
    }
  }
  if (out.empty()) throw DataError("no .obj meshes found under " + dir.string());
  return out;
}

std::uint64_t shape_seed(std::uint64_t seed, const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  // splitmix64 finalizer
  std::uint64_t z = seed + h + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

DatasetRecord make_record(const ShapeSource& shape, const BuildOptions& options, geometry::PointSet* cloud) {
  const auto mesh = geometry::normalize_mesh(shape.mesh);
  const std::uint64_t seed = shape_seed(options.seed, shape.id);
  auto sections = options.sections;
  sections.seed = seed;
  DatasetRecord r;
  r.shape_id = shape.id;
  r.class_label = shape.class_label;
  r.seed = seed;
  r.set = pipeline::cross_sections(mesh, sections).set;
  r.gt_points_file = "points/" + shape.id + ".ply";
  r.mesh_file = "meshes/" + shape.id + ".obj";
  if (cloud) *cloud = geometry::sample_surface(mesh, options.points, seed);
  return r;
}

BuildReport build(const std::vector<ShapeSource>& shapes, const BuildOptions& options,
                  const std::filesystem::path& out_dir) {
  BuildReport report;
  json ids = json::array();
  std::set<std::string> seen;
  for (const auto& shape : shapes) {
    if (!seen.insert(shape.id).second) throw DataError("duplicate shape id " + shape.id);
    geometry::PointSet cloud;
    DatasetRecord record;
    try {
      record = make_record(shape, options, &cloud);
    } catch (const GeometryError& e) {
      report.failures.push_back(shape.id + ": " + e.what());
      continue;
    }
    geometry::save_ply(cloud, out_dir / record.gt_points_file, record.seed);
    geometry::save_obj(geometry::normalize_mesh(shape.mesh), out_dir / record.mesh_file);
    write_text(out_dir / "records" / (shape.id + ".json"), dump(to_json(record)));
    ids.push_back(shape.id);
    ++report.written;
  }
  const auto& s = options.sections;
  json index = {{"format_version", kFormatVersion},
                {"seed", options.seed},
                {"options",
                 {{"planes_per_shape", s.planes},
                  {"strategy", s.strategy == geometry::PlaneStrategy::kAxisAligned ? "axis" : "random"},
                  {"axis", s.axis},
                  {"k", s.encode.k},
                  {"rho", s.rho},
                  {"points", options.points}}},
                {"records", ids},
                {"failures", report.failures}};
  write_text(out_dir / "index.json", dump(index));
  return report;
}

}  // namespace curvy::dataset
