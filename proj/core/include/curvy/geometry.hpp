#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace curvy::geometry {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Row-major list of 3D points (n x 3).
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  /// Throws GeometryError when a face index is out of range or repeated.
  void validate() const;
};

struct BoundingBox {
  Vec3 min;
  Vec3 max;

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double diagonal() const { return extent().norm(); }
};

BoundingBox bounding_box(const std::vector<Vec3>& points);

/// The plane {x : normal . x = offset}.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  /// Normalizes `normal`; throws GeometryError for a zero normal.
  static Plane make(const Vec3& normal, double offset);

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

/// Ordered polyline lying in a slicing plane.
struct Contour {
  std::vector<Vec3> points;
  bool closed = true;
  double length = 0.0;
  /// Plane the contour was generated from (after any degeneracy perturbation).
  Plane plane;

  /// Recomputes `length` from `points` (cyclic when closed).
  void update_length();
};

double polyline_length(const std::vector<Vec3>& points, bool closed);

// ---------------------------------------------------------------------------
// Mesh preparation and sampling

/// Centers the bounding box at the origin and scales the largest extent to 1.
/// A mesh that is already normalized (to 1e-12) is returned unchanged, which
/// makes the operation idempotent bit-for-bit.
TriangleMesh normalize_mesh(const TriangleMesh& mesh);

/// Area-weighted uniform surface samples, deterministic for a fixed seed.
PointSet sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed);

enum class PlaneStrategy { kAxisAligned, kRandom };

/// Axis-aligned: `count` planes orthogonal to `axis` (0=x, 1=y, 2=z), evenly
/// spaced strictly inside the bounding box. Random: directions uniform on the
/// sphere, offsets uniform over the box's projection onto the direction.
std::vector<Plane> sample_planes(const TriangleMesh& mesh, std::size_t count,
                                 PlaneStrategy strategy, int axis, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Slicing

struct Segment {
  Vec3 a;
  Vec3 b;
};

struct SliceOptions {
  /// Drop vertices whose turning angle is below this (radians). Negative
  /// disables merging.
  double collinear_angle = 1e-6;
  double match_tolerance = 1e-9;
  double vertex_tolerance = 1e-12;
  double perturb_step = 1e-9;
  int max_retries = 8;
  /// Consecutive contour vertices closer than this are merged; covers the
  /// sliver edges left next to a vertex after perturbation.
  double merge_distance = 1e-7;
};

/// Intersection segments of every triangle that crosses `plane`, one per
/// triangle, oriented so that loops wind counter-clockwise about the plane
/// normal for outward-facing triangles. Throws GeometryError when a vertex
/// lies on the plane (callers perturb first).
std::vector<Segment> intersect_triangles(const TriangleMesh& mesh, const Plane& plane,
                                         double vertex_tolerance = 1e-12);

/// Chains segments into closed loops by endpoint matching. Each segment is
/// used exactly once. Throws GeometryError on an open chain.
std::vector<std::vector<Vec3>> chain_segments(const std::vector<Segment>& segments,
                                              double tolerance);

/// Removes vertices of a closed polyline whose turning angle is below
/// `angle` radians, and consecutive vertices within `min_gap` of each other.
std::vector<Vec3> merge_collinear(const std::vector<Vec3>& loop, double angle, double min_gap = 1e-12);

/// Mesh-plane intersection into closed contours. When a mesh vertex lies on
/// the plane the offset is nudged by `perturb_step` and the slice retried.
std::vector<Contour> slice_mesh(const TriangleMesh& mesh, const Plane& plane,
                                const SliceOptions& options = {});

}  // namespace curvy::geometry
