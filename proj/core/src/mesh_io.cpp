#include "curvy/mesh_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "curvy/error.hpp"

namespace curvy::geometry {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

[[noreturn]] void malformed(const std::string& source, std::size_t line, const std::string& what) {
  throw DataError(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

TriangleMesh parse_obj(const std::string& text, const std::string& source_name) {
  TriangleMesh mesh;
  std::vector<std::size_t> face_lines;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tokens(line);
    std::string tag;
    if (!(tokens >> tag) || tag[0] == '#') continue;

    if (tag == "v") {
      double x, y, z;
      if (!(tokens >> x >> y >> z)) malformed(source_name, line_no, "vertex needs three coordinates");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (tokens >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        int value = 0;
        auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), value);
        if (ec != std::errc() || ptr != head.data() + head.size() || value == 0) {
          malformed(source_name, line_no, "bad face index '" + tok + "'");
        }
        // OBJ is 1-based; negative indices count back from the latest vertex.
        idx.push_back(value > 0 ? value - 1 : static_cast<int>(mesh.vertices.size()) + value);
      }
      if (idx.size() < 3) malformed(source_name, line_no, "face needs at least three vertices");
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) {
        mesh.faces.push_back({idx[0], idx[i], idx[i + 1]});
        face_lines.push_back(line_no);
      }
    }
  }

  if (mesh.vertices.empty() || mesh.faces.empty()) {
    throw DataError(source_name + ": empty mesh (no vertices or no faces)");
  }
  const auto n = static_cast<int>(mesh.vertices.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (int v : mesh.faces[f]) {
      if (v < 0 || v >= n) {
        malformed(source_name, face_lines[f],
                  "face index " + std::to_string(v + 1) + " out of range (" + std::to_string(n) +
                      " vertices)");
      }
    }
    const Face& face = mesh.faces[f];
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      malformed(source_name, face_lines[f], "face repeats a vertex");
    }
  }
  return mesh;
}

TriangleMesh load_obj(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("mesh file not found: " + path.string());
  return parse_obj(read_file(path), path.string());
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const Face& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

std::string format_ply(const PointSet& points, std::optional<std::uint64_t> seed) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  if (seed) out += "comment seed " + std::to_string(*seed) + "\n";
  out += "element vertex " + std::to_string(points.rows()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\nend_header\n";
  char buf[96];
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", static_cast<double>(static_cast<float>(points(i, 0))),
                  static_cast<double>(static_cast<float>(points(i, 1))),
                  static_cast<double>(static_cast<float>(points(i, 2))));
    out += buf;
  }
  return out;
}

void save_ply(const PointSet& points, const std::filesystem::path& path,
              std::optional<std::uint64_t> seed) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << format_ply(points, seed);
}

PointSet load_ply(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  long count = -1;
  bool ascii = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end_header") break;
    std::istringstream tokens(line);
    std::string tag;
    tokens >> tag;
    if (tag == "format") {
      std::string kind;
      tokens >> kind;
      ascii = kind == "ascii";
    } else if (tag == "element") {
      std::string name;
      tokens >> name;
      if (name == "vertex") tokens >> count;
    }
  }
  if (!ascii) malformed(path.string(), line_no, "only ASCII PLY is supported");
  if (count < 0) malformed(path.string(), line_no, "missing vertex element");

  PointSet points(count, 3);
  for (long i = 0; i < count; ++i) {
    if (!std::getline(in, line)) malformed(path.string(), line_no, "truncated vertex list");
    ++line_no;
    std::istringstream tokens(line);
    double x, y, z;
    if (!(tokens >> x >> y >> z)) malformed(path.string(), line_no, "vertex needs three values");
    points.row(i) << x, y, z;
  }
  return points;
}

}  // namespace curvy::geometry
