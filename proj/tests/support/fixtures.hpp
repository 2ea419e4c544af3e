#pragma once

// Fixtures and independent oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "curvy/geometry.hpp"
#include "curvy/graphrep.hpp"
#include "curvy/splitfit.hpp"

namespace fixtures {

using curvy::geometry::Contour;
using curvy::geometry::Plane;
using curvy::geometry::TriangleMesh;
using curvy::geometry::Vec3;

inline Contour make_contour(std::vector<Vec3> points, const Plane& plane = Plane{}) {
  Contour c;
  c.points = std::move(points);
  c.closed = true;
  c.plane = plane;
  c.update_length();
  return c;
}

/// Axis-aligned square in z = 0 with `per_edge` samples per edge; corners sit
/// at indices 0, per_edge, 2*per_edge, 3*per_edge.
inline Contour square(std::size_t per_edge, double side = 1.0) {
  const Vec3 corners[4] = {{0, 0, 0}, {side, 0, 0}, {side, side, 0}, {0, side, 0}};
  std::vector<Vec3> pts;
  for (int e = 0; e < 4; ++e) {
    for (std::size_t i = 0; i < per_edge; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(per_edge);
      pts.push_back(corners[e] + t * (corners[(e + 1) % 4] - corners[e]));
    }
  }
  return make_contour(std::move(pts));
}

inline Contour circle(std::size_t n, double radius = 0.5) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    pts.emplace_back(radius * std::cos(a), radius * std::sin(a), 0.0);
  }
  return make_contour(std::move(pts));
}

inline Contour ellipse(std::size_t n, double a, double b) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    pts.emplace_back(a * std::cos(t), b * std::sin(t), 0.0);
  }
  return make_contour(std::move(pts));
}

/// Turning angle in degrees at vertex i of a closed polyline, by atan2 of the
/// cross and dot products of the adjacent edge directions (z-up).
inline double brute_turn_degrees(const std::vector<Vec3>& pts, std::size_t i) {
  const std::size_t n = pts.size();
  const Vec3 u = pts[i] - pts[(i + n - 1) % n];
  const Vec3 v = pts[(i + 1) % n] - pts[i];
  return std::atan2(u.cross(v).z(), u.dot(v)) * 180.0 / std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Closed curves whose arcs are degree <= 5 polynomials in their own chord-length
// parameter. Two arc kinds qualify exactly: straight arcs with arbitrary
// sample spacing (chord fraction equals the linear parameter), and curved
// degree-5 arcs carrying exactly six samples, where the fit interpolates.

struct SyntheticCurve {
  Contour contour;
  std::vector<std::size_t> splits;
};

inline Vec3 eval_coeffs(const curvy::splitfit::Coefficients& c, double s) {
  Vec3 p = Vec3::Zero();
  for (int r = curvy::splitfit::kCoeffRows - 1; r >= 0; --r) p = p * s + c.row(r).transpose();
  return p;
}

/// Polygon with 3..6 corners (turn 360/sides >= 60 degrees) in a random plane;
/// each edge is a straight run of 6..20 unevenly spaced samples or a small
/// degree-5 bulge sampled six times.
inline SyntheticCurve synthetic_curve(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> side_count(3, 6);
  std::uniform_int_distribution<int> run_length(6, 20);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int sides = side_count(rng);
  const double radius = 0.3 + 0.1 * (unit(rng) + 1.0);

  Vec3 n(unit(rng), unit(rng), unit(rng));
  n.normalize();
  const Vec3 e1 = n.unitOrthogonal();
  const Vec3 e2 = n.cross(e1);
  const Vec3 origin(0.1 * unit(rng), 0.1 * unit(rng), 0.1 * unit(rng));
  const double phase = unit(rng) * std::numbers::pi;

  std::vector<Vec3> corners;
  for (int i = 0; i < sides; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * i / sides;
    corners.push_back(origin + radius * (std::cos(a) * e1 + std::sin(a) * e2));
  }

  SyntheticCurve out;
  std::vector<Vec3> pts;
  for (int i = 0; i < sides; ++i) {
    const Vec3 a = corners[static_cast<std::size_t>(i)];
    const Vec3 b = corners[static_cast<std::size_t>((i + 1) % sides)];
    out.splits.push_back(pts.size());
    if (unit(rng) < 0.0) {
      const int count = run_length(rng);
      std::vector<double> s(static_cast<std::size_t>(count), 0.0);
      for (int k = 1; k < count; ++k) s[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k - 1)] + 1.0 + 0.8 * unit(rng);
      const double total = s.back() + 1.0 + 0.8 * unit(rng);
      for (double v : s) pts.push_back(a + (v / total) * (b - a));
    } else {
      // g(s) = a + s (b - a) + s (1 - s) (q0 + q1 s + q2 s^2 + q3 s^3), in-plane bulge
      const double len = (b - a).norm();
      curvy::splitfit::Coefficients c = curvy::splitfit::Coefficients::Zero();
      c.row(0) = a.transpose();
      c.row(1) = (b - a).transpose();
      for (int j = 0; j < 4; ++j) {
        const Vec3 q = 0.05 * len / (1 + j) * (unit(rng) * e1 + unit(rng) * e2);
        c.row(j + 1) += q.transpose();
        c.row(j + 2) -= q.transpose();
      }
      for (int k = 0; k < 5; ++k) pts.push_back(eval_coeffs(c, (k + 0.3 * unit(rng) * (k > 0)) / 5.0));
    }
  }
  out.contour = make_contour(std::move(pts), Plane::make(n, n.dot(origin)));
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force triangle/plane intersection: every triangle with vertices on both
// sides contributes the two edge crossing points.

struct RawSegment {
  Vec3 a, b;
};

inline std::vector<RawSegment> brute_slice(const TriangleMesh& mesh, const Plane& plane) {
  std::vector<RawSegment> out;
  for (const auto& f : mesh.faces) {
    Vec3 p[3];
    double d[3];
    for (int i = 0; i < 3; ++i) {
      p[i] = mesh.vertices[static_cast<std::size_t>(f[i])];
      d[i] = plane.normal.dot(p[i]) - plane.offset;
    }
    std::vector<Vec3> hits;
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3;
      if ((d[i] < 0) != (d[j] < 0)) {
        const double t = d[i] / (d[i] - d[j]);
        hits.push_back(p[i] + t * (p[j] - p[i]));
      }
    }
    if (hits.size() == 2) out.push_back({hits[0], hits[1]});
  }
  return out;
}

/// Each oracle segment matches exactly one library segment (either
/// orientation) within `tol`, and the counts agree.
template <class Seg>
inline bool same_segment_sets(const std::vector<RawSegment>& oracle, const std::vector<Seg>& got, double tol) {
  if (oracle.size() != got.size()) return false;
  std::vector<bool> used(got.size(), false);
  for (const auto& o : oracle) {
    bool found = false;
    for (std::size_t i = 0; i < got.size() && !found; ++i) {
      if (used[i]) continue;
      const bool same = (o.a - got[i].a).norm() <= tol && (o.b - got[i].b).norm() <= tol;
      const bool flipped = (o.a - got[i].b).norm() <= tol && (o.b - got[i].a).norm() <= tol;
      if (same || flipped) {
        used[i] = true;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

inline Plane random_plane(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> off(-0.45, 0.45);
  Vec3 n(g(rng), g(rng), g(rng));
  return Plane::make(n.normalized(), off(rng));
}

// ---------------------------------------------------------------------------

inline curvy::splitfit::CrossSectionSet random_set(std::size_t m, std::size_t k, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.3);
  curvy::splitfit::CrossSectionSet set;
  for (std::size_t s = 0; s < m; ++s) {
    curvy::splitfit::CrossSection cs;
    for (std::size_t j = 0; j < k; ++j) {
      curvy::splitfit::Piece p;
      for (int r = 0; r < curvy::splitfit::kCoeffRows; ++r) {
        for (int c = 0; c < 3; ++c) p.coeffs(r, c) = g(rng);
      }
      p.chord_span = 1.0;
      cs.pieces.push_back(p);
      cs.junctions.push_back(curvy::splitfit::Junction::kCorner);
    }
    cs.plane = Plane::make(Vec3::UnitZ(), static_cast<double>(s));
    set.sections.push_back(std::move(cs));
  }
  return set;
}

/// Random permutation of 0..n-1.
inline std::vector<std::size_t> random_permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path = std::filesystem::temp_directory_path() / ("curvy_" + tag + "_" + std::to_string(rng() % 1000000000));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixtures
