#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "curvy/geometry.hpp"

namespace curvy::splitfit {

using geometry::Contour;
using geometry::Plane;
using geometry::Vec3;

inline constexpr int kDegree = 5;
inline constexpr int kCoeffRows = kDegree + 1;

/// Coefficient matrix of one piece: row i multiplies t^i, columns are x, y, z.
using Coefficients = Eigen::Matrix<double, kCoeffRows, 3, Eigen::RowMajor>;

struct Piece {
  Coefficients coeffs = Coefficients::Zero();
  /// Length of the polyline arc the piece was fitted to.
  double chord_span = 0.0;
};

enum class Junction {
  kSmooth,  // position and scaled tangent continuity
  kCorner,  // position continuity only
};

struct CrossSection {
  /// Cyclic: piece j ends where piece (j+1) % k starts.
  std::vector<Piece> pieces;
  /// junctions[j] joins piece j to piece j+1.
  std::vector<Junction> junctions;
  Plane plane;

  std::size_t k() const { return pieces.size(); }
  /// max_j |f_j(1) - f_{j+1}(0)|
  double max_junction_gap() const;
  /// Largest mismatch of the scaled tangent condition over smooth junctions.
  double max_tangent_mismatch() const;
};

/// m cross-sections sharing one piece count k.
struct CrossSectionSet {
  std::vector<CrossSection> sections;

  std::size_t m() const { return sections.size(); }
  std::size_t k() const { return sections.empty() ? 0 : sections.front().k(); }
  /// Throws DataError when empty or when piece counts differ.
  void validate() const;
  /// Stacked coefficients, shape m x (6k) x 3, as m row-major (6k x 3) blocks.
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> stacked() const;
};

struct SamplingConfig {
  double rho = 64.0;  // points per unit length
};

// ---------------------------------------------------------------------------

/// Douglas-Peucker simplification; returns sorted kept indices. For closed
/// input the loop is first cut at its two mutually farthest vertices.
std::vector<std::size_t> douglas_peucker(const std::vector<Vec3>& points, double eps, bool closed);

/// Signed turning angle at `i` between (i - prev) and (next - i), in degrees,
/// clamped to [-90, 90]. The sign is taken against `normal`.
double turning_angle(const Vec3& prev, const Vec3& at, const Vec3& next, const Vec3& normal);

/// Area normal of a closed polyline (Newell's method), unit length.
Vec3 polygon_normal(const std::vector<Vec3>& points);

struct SplitOptions {
  int max_iterations = 40;
};

/// Split vertices chosen by repeatedly tightening Douglas-Peucker until more
/// than k vertices survive (or every vertex survives), then keeping the k with
/// the largest |turning angle| measured on the simplified polygon. Ties go to
/// the smaller index. Returned indices are sorted.
std::vector<std::size_t> adaptive_split(const Contour& contour, std::size_t k,
                                        const SplitOptions& options = {});

/// Candidate set produced by the Douglas-Peucker schedule (sorted indices).
std::vector<std::size_t> split_candidates(const Contour& contour, std::size_t k,
                                          const SplitOptions& options = {});

struct FitOptions {
  /// Junctions whose polyline turning angle exceeds this are fitted C0 only.
  double corner_angle_degrees = 30.0;
  /// Ridge weight applied to pieces with fewer than 6 samples.
  double ridge = 1e-10;
};

/// Joint constrained least-squares fit of degree-5 pieces between consecutive
/// split vertices (cyclic). Constraints: endpoint interpolation and, at smooth
/// junctions, f_j'(1)/span_j = f_{j+1}'(0)/span_{j+1}.
CrossSection fit_cross_section(const Contour& contour, const std::vector<std::size_t>& splits,
                               const FitOptions& options = {});

/// Horner evaluation; throws for t outside [0, 1].
Vec3 eval_piece(const Piece& piece, double t);
Vec3 eval_piece_derivative(const Piece& piece, double t);

/// Arc length by 64-segment polyline quadrature.
double piece_length(const Piece& piece);

/// Per piece, max(2, ceil(rho * length)) points at uniform t (endpoints
/// included, so junction points appear twice).
std::vector<Vec3> sample_cross_section(const CrossSection& cs, const SamplingConfig& cfg);

/// Largest distance between a contour vertex and its fitted position.
double max_fit_residual(const Contour& contour, const std::vector<std::size_t>& splits,
                        const CrossSection& cs);

// ---------------------------------------------------------------------------
// Contour encoding used by the dataset pipeline

/// Inserts midpoints into the longest segment until the contour has at least
/// `min_points` vertices.
Contour upsample_contour(const Contour& contour, std::size_t min_points);

struct EncodeOptions {
  std::size_t k = 8;
  /// Contours are densified to at least `density_factor * k` vertices.
  std::size_t density_factor = 8;
  SplitOptions split;
  FitOptions fit;
};

struct EncodedContour {
  CrossSection section;
  std::vector<std::size_t> splits;
  Contour contour;  // after densification
  double max_residual = 0.0;
  bool upsampled = false;
  /// Number of split vertices added because Douglas-Peucker found fewer than k.
  std::size_t topped_up = 0;
};

/// Densify, split and fit one contour into k pieces. When the contour has
/// fewer than k distinct corners the remaining splits bisect the longest
/// pieces by arc length.
EncodedContour encode_contour(const Contour& contour, const EncodeOptions& options = {});

}  // namespace curvy::splitfit
