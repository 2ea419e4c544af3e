#include "curvy/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>

#include "curvy/error.hpp"

namespace curvy::geometry {

void TriangleMesh::validate() const {
  const auto n = static_cast<int>(vertices.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    for (int idx : face) {
      if (idx < 0 || idx >= n) {
        std::ostringstream msg;
        msg << "face " << f << " references vertex " << idx << " but mesh has " << n
            << " vertices";
        throw GeometryError(msg.str());
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw GeometryError("face " + std::to_string(f) + " repeats a vertex");
    }
  }
}

BoundingBox bounding_box(const std::vector<Vec3>& points) {
  if (points.empty()) throw GeometryError("bounding box of an empty point list");
  BoundingBox box{points.front(), points.front()};
  for (const Vec3& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

Plane Plane::make(const Vec3& normal, double offset) {
  const double len = normal.norm();
  if (!(len > 0.0) || !std::isfinite(len)) throw GeometryError("plane normal must be non-zero");
  return Plane{normal / len, offset / len};
}

double polyline_length(const std::vector<Vec3>& points, bool closed) {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += (points[i] - points[i - 1]).norm();
  if (closed && points.size() > 1) total += (points.front() - points.back()).norm();
  return total;
}

void Contour::update_length() { length = polyline_length(points, closed); }

TriangleMesh normalize_mesh(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw GeometryError("cannot normalize an empty mesh");
  const BoundingBox box = bounding_box(mesh.vertices);
  const double extent = box.extent().maxCoeff();
  if (!(extent > 0.0)) throw GeometryError("degenerate mesh: zero extent on all axes");

  const Vec3 center = box.center();
  if (center.cwiseAbs().maxCoeff() <= 1e-12 && std::abs(extent - 1.0) <= 1e-12) return mesh;

  TriangleMesh out = mesh;
  const double scale = 1.0 / extent;
  for (Vec3& v : out.vertices) v = (v - center) * scale;
  return out;
}

namespace {

double triangle_area(const TriangleMesh& mesh, const Face& f) {
  const Vec3& a = mesh.vertices[f[0]];
  const Vec3& b = mesh.vertices[f[1]];
  const Vec3& c = mesh.vertices[f[2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

PointSet sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw GeometryError("sample count must be positive");
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (const Face& f : mesh.faces) {
    total += triangle_area(mesh, f);
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw GeometryError("cannot sample a mesh whose faces are all degenerate");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  PointSet points(static_cast<Eigen::Index>(count), 3);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = uniform(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const Face& f = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];
    const double r1 = std::sqrt(uniform(rng));
    const double r2 = uniform(rng);
    const Vec3 p = (1.0 - r1) * mesh.vertices[f[0]] + r1 * (1.0 - r2) * mesh.vertices[f[1]] +
                   r1 * r2 * mesh.vertices[f[2]];
    points.row(static_cast<Eigen::Index>(i)) = p.transpose();
  }
  return points;
}

std::vector<Plane> sample_planes(const TriangleMesh& mesh, std::size_t count,
                                 PlaneStrategy strategy, int axis, std::uint64_t seed) {
  if (count == 0) throw GeometryError("plane count must be positive");
  const BoundingBox box = bounding_box(mesh.vertices);
  std::vector<Plane> planes;
  planes.reserve(count);

  if (strategy == PlaneStrategy::kAxisAligned) {
    if (axis < 0 || axis > 2) throw GeometryError("axis must be 0, 1 or 2");
    const double lo = box.min[axis];
    const double hi = box.max[axis];
    const double step = (hi - lo) / static_cast<double>(count + 1);
    for (std::size_t i = 0; i < count; ++i) {
      Plane p;
      p.normal = Vec3::Unit(axis);
      p.offset = lo + static_cast<double>(i + 1) * step;
      planes.push_back(p);
    }
    return planes;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  while (planes.size() < count) {
    Vec3 n(gauss(rng), gauss(rng), gauss(rng));
    const double len = n.norm();
    if (len < 1e-12) continue;
    n /= len;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int corner = 0; corner < 8; ++corner) {
      const Vec3 c((corner & 1) ? box.max.x() : box.min.x(), (corner & 2) ? box.max.y() : box.min.y(),
                   (corner & 4) ? box.max.z() : box.min.z());
      lo = std::min(lo, n.dot(c));
      hi = std::max(hi, n.dot(c));
    }
    planes.push_back(Plane{n, lo + uniform(rng) * (hi - lo)});
  }
  return planes;
}

// ---------------------------------------------------------------------------

namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

// Intersection of edge (p, q) with the plane. Endpoints are put in a canonical
// order first so the two triangles sharing an edge produce bit-identical points.
Vec3 edge_point(const Vec3& p, double dp, const Vec3& q, double dq) {
  if (lex_less(q, p)) return edge_point(q, dq, p, dp);
  const double t = dp / (dp - dq);
  return p + t * (q - p);
}

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

std::vector<Segment> intersect_triangles(const TriangleMesh& mesh, const Plane& plane,
                                         double vertex_tolerance) {
  std::vector<double> dist(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    dist[i] = plane.signed_distance(mesh.vertices[i]);
  }

  std::vector<Segment> segments;
  for (const Face& f : mesh.faces) {
    const double d[3] = {dist[f[0]], dist[f[1]], dist[f[2]]};
    for (double v : d) {
      if (std::abs(v) <= vertex_tolerance) {
        throw GeometryError("mesh vertex lies on the slicing plane");
      }
    }
    const bool pos[3] = {d[0] > 0.0, d[1] > 0.0, d[2] > 0.0};
    if (pos[0] == pos[1] && pos[1] == pos[2]) continue;

    std::vector<Vec3> hits;
    for (int e = 0; e < 3; ++e) {
      const int i = e;
      const int j = (e + 1) % 3;
      if (pos[i] != pos[j]) {
        hits.push_back(edge_point(mesh.vertices[f[i]], d[i], mesh.vertices[f[j]], d[j]));
      }
    }
    Segment seg{hits[0], hits[1]};
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3 face_normal = (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a);
    const Vec3 direction = plane.normal.cross(face_normal);
    if ((seg.b - seg.a).dot(direction) < 0.0) std::swap(seg.a, seg.b);
    segments.push_back(seg);
  }
  return segments;
}

std::vector<std::vector<Vec3>> chain_segments(const std::vector<Segment>& segments,
                                              double tolerance) {
  const double cell = std::max(tolerance, 1e-15) * 4.0;
  auto key_of = [cell](const Vec3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / cell)),
                   static_cast<std::int64_t>(std::floor(p.y() / cell)),
                   static_cast<std::int64_t>(std::floor(p.z() / cell))};
  };

  // end 0 = segment start, end 1 = segment end
  std::unordered_map<CellKey, std::vector<std::pair<std::size_t, int>>, CellHash> grid;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    grid[key_of(segments[s].a)].emplace_back(s, 0);
    grid[key_of(segments[s].b)].emplace_back(s, 1);
  }

  std::vector<bool> used(segments.size(), false);

  // Finds an unused segment with an endpoint at `p`; prefers one that starts there.
  auto find_next = [&](const Vec3& p) -> std::pair<long, int> {
    const CellKey base = key_of(p);
    std::pair<long, int> fallback{-1, 0};
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = grid.find(CellKey{base.x + dx, base.y + dy, base.z + dz});
          if (it == grid.end()) continue;
          for (auto [s, end] : it->second) {
            if (used[s]) continue;
            const Vec3& q = end == 0 ? segments[s].a : segments[s].b;
            if ((q - p).norm() > tolerance) continue;
            if (end == 0) return {static_cast<long>(s), 0};
            if (fallback.first < 0 || static_cast<long>(s) < fallback.first) {
              fallback = {static_cast<long>(s), 1};
            }
          }
        }
      }
    }
    return fallback;
  };

  std::vector<std::vector<Vec3>> loops;
  for (std::size_t start = 0; start < segments.size(); ++start) {
    if (used[start]) continue;
    used[start] = true;
    std::vector<Vec3> loop{segments[start].a};
    const Vec3 origin = segments[start].a;
    Vec3 cursor = segments[start].b;
    while ((cursor - origin).norm() > tolerance) {
      loop.push_back(cursor);
      auto [next, end] = find_next(cursor);
      if (next < 0) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "open intersection chain from (" << origin.transpose() << ") to ("
            << cursor.transpose() << "); mesh is not watertight at this plane";
        throw GeometryError(msg.str());
      }
      used[static_cast<std::size_t>(next)] = true;
      const Segment& seg = segments[static_cast<std::size_t>(next)];
      cursor = end == 0 ? seg.b : seg.a;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

std::vector<Vec3> merge_collinear(const std::vector<Vec3>& loop, double angle, double min_gap) {
  std::vector<Vec3> pts;
  pts.reserve(loop.size());
  for (const Vec3& p : loop) {
    if (pts.empty() || (p - pts.back()).norm() > min_gap) pts.push_back(p);
  }
  while (pts.size() > 1 && (pts.front() - pts.back()).norm() <= min_gap) pts.pop_back();
  if (angle < 0.0) return pts;

  bool changed = true;
  while (changed && pts.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < pts.size() && pts.size() > 3; ++i) {
      const Vec3& prev = pts[(i + pts.size() - 1) % pts.size()];
      const Vec3& next = pts[(i + 1) % pts.size()];
      const Vec3 u = pts[i] - prev;
      const Vec3 v = next - pts[i];
      const double turn = std::atan2(u.cross(v).norm(), u.dot(v));
      if (turn < angle) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
  return pts;
}

std::vector<Contour> slice_mesh(const TriangleMesh& mesh, const Plane& plane,
                                const SliceOptions& options) {
  Plane current = plane;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    bool touches = false;
    for (const Vec3& v : mesh.vertices) {
      if (std::abs(current.signed_distance(v)) <= options.vertex_tolerance) {
        touches = true;
        break;
      }
    }
    if (touches) {
      current.offset += options.perturb_step;
      continue;
    }

    const auto segments = intersect_triangles(mesh, current, options.vertex_tolerance);
    const auto loops = chain_segments(segments, options.match_tolerance);

    std::vector<Contour> contours;
    for (const auto& loop : loops) {
      Contour c;
      c.points = merge_collinear(loop, options.collinear_angle, std::max(options.merge_distance, 1e-12));
      if (c.points.size() < 3) continue;
      c.closed = true;
      c.plane = current;
      // Counter-clockwise about the plane normal (Newell area vector).
      Vec3 area = Vec3::Zero();
      for (std::size_t i = 0; i < c.points.size(); ++i) {
        area += c.points[i].cross(c.points[(i + 1) % c.points.size()]);
      }
      if (area.dot(current.normal) < 0.0) std::reverse(c.points.begin(), c.points.end());
      c.update_length();
      contours.push_back(std::move(c));
    }
    return contours;
  }
  throw GeometryError("slice retry limit exceeded: mesh vertices keep landing on the plane");
}

}  // namespace curvy::geometry
