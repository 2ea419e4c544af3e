#include "curvy/shapes.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

namespace curvy::shapes {

TriangleMesh box(const Vec3& size) {
  TriangleMesh m;
  const Vec3 h = 0.5 * size;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  }
  // Outward-facing quads split into triangles.
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                           {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

TriangleMesh cube() {
  TriangleMesh m = box(Vec3::Ones());
  for (Vec3& v : m.vertices) v += Vec3::Constant(0.5);
  return m;
}

TriangleMesh tetrahedron() {
  TriangleMesh m;
  m.vertices = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return m;
}

TriangleMesh icosphere(int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {Vec3(-1, t, 0), Vec3(1, t, 0),  Vec3(-1, -t, 0), Vec3(1, -t, 0),
                Vec3(0, -1, t), Vec3(0, 1, t),  Vec3(0, -1, -t), Vec3(0, 1, -t),
                Vec3(t, 0, -1), Vec3(t, 0, 1),  Vec3(-t, 0, -1), Vec3(-t, 0, 1)};
  for (Vec3& v : m.vertices) v.normalize();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      const int id = static_cast<int>(m.vertices.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<geometry::Face> faces;
    for (const auto& f : m.faces) {
      const int a = mid(f[0], f[1]);
      const int b = mid(f[1], f[2]);
      const int c = mid(f[2], f[0]);
      faces.push_back({f[0], a, c});
      faces.push_back({f[1], b, a});
      faces.push_back({f[2], c, b});
      faces.push_back({a, b, c});
    }
    m.faces = std::move(faces);
  }
  return m;
}

TriangleMesh ellipsoid(const Vec3& radii, int subdivisions) {
  TriangleMesh m = icosphere(subdivisions);
  for (Vec3& v : m.vertices) v = v.cwiseProduct(radii);
  return m;
}

TriangleMesh torus(double major, double minor, int rings, int sides) {
  TriangleMesh m;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < rings; ++i) {
    const double u = two_pi * i / rings;
    for (int j = 0; j < sides; ++j) {
      const double v = two_pi * j / sides;
      const double r = major + minor * std::cos(v);
      m.vertices.emplace_back(r * std::cos(u), r * std::sin(u), minor * std::sin(v));
    }
  }
  for (int i = 0; i < rings; ++i) {
    for (int j = 0; j < sides; ++j) {
      const int a = i * sides + j;
      const int b = ((i + 1) % rings) * sides + j;
      const int c = ((i + 1) % rings) * sides + (j + 1) % sides;
      const int d = i * sides + (j + 1) % sides;
      m.faces.push_back({a, b, c});
      m.faces.push_back({a, c, d});
    }
  }
  return m;
}

TriangleMesh rotated(const TriangleMesh& mesh, const Vec3& axis, double angle) {
  const Eigen::Matrix3d r = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) v = r * v;
  return out;
}

std::vector<ToyShape> toy_corpus(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> aspect(0.35, 1.0);
  std::uniform_real_distribution<double> spin(0.0, std::numbers::pi);
  std::vector<ToyShape> corpus;
  corpus.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ToyShape shape;
    char id[32];
    std::snprintf(id, sizeof id, "toy_%03zu", i);
    shape.id = id;
    TriangleMesh mesh;
    switch (i % 3) {
      case 0:
        shape.class_label = "sphere";
        mesh = rotated(icosphere(2 + static_cast<int>(i / 3) % 2), Vec3(0.3, 0.5, 1.0), spin(rng));
        break;
      case 1: {
        shape.class_label = "box";
        const Vec3 size(1.0, aspect(rng), aspect(rng));
        mesh = rotated(box(size), Vec3::UnitZ(), spin(rng));
        break;
      }
      default: {
        shape.class_label = "ellipsoid";
        const Vec3 radii(1.0, aspect(rng), aspect(rng));
        mesh = rotated(ellipsoid(radii, 2), Vec3::UnitZ(), spin(rng));
        break;
      }
    }
    shape.mesh = geometry::normalize_mesh(mesh);
    corpus.push_back(std::move(shape));
  }
  return corpus;
}

}  // namespace curvy::shapes
