#include "curvy/splitfit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/LU>

#include "curvy/error.hpp"

namespace curvy::splitfit {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Simplifies the sub-polyline visiting points[order[0..]] and appends kept
// positions (into `order`) to `keep`.
void simplify_run(const std::vector<Vec3>& points, const std::vector<std::size_t>& order,
                  double eps, std::vector<bool>& keep) {
  if (order.size() < 2) return;
  keep[0] = true;
  keep[order.size() - 1] = true;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, order.size() - 1}};
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    if (hi <= lo + 1) continue;
    double best = -1.0;
    std::size_t best_at = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const double d = point_segment_distance(points[order[i]], points[order[lo]], points[order[hi]]);
      if (d > best) {
        best = d;
        best_at = i;
      }
    }
    if (best > eps) {
      keep[best_at] = true;
      stack.emplace_back(lo, best_at);
      stack.emplace_back(best_at, hi);
    }
  }
}

std::vector<std::size_t> run_simplify(const std::vector<Vec3>& points,
                                      const std::vector<std::size_t>& order, double eps) {
  std::vector<bool> keep(order.size(), false);
  simplify_run(points, order, eps, keep);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (keep[i]) out.push_back(order[i]);
  }
  return out;
}

double unsigned_turn_degrees(const Vec3& prev, const Vec3& at, const Vec3& next) {
  const Vec3 u = at - prev;
  const Vec3 v = next - at;
  return std::atan2(u.cross(v).norm(), u.dot(v)) * kRadToDeg;
}

std::size_t distinct_count(const std::vector<Vec3>& pts) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3& next = pts[(i + 1) % pts.size()];
    if ((pts[i] - next).norm() > 1e-12) ++count;
  }
  return std::max<std::size_t>(count, pts.empty() ? 0 : 1);
}

std::vector<std::size_t> rank_by_angle(const Contour& contour,
                                       const std::vector<std::size_t>& candidates, std::size_t k) {
  const Vec3 normal = polygon_normal(contour.points);
  const std::size_t c = candidates.size();
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(c);
  for (std::size_t i = 0; i < c; ++i) {
    const Vec3& prev = contour.points[candidates[(i + c - 1) % c]];
    const Vec3& next = contour.points[candidates[(i + 1) % c]];
    const double angle = turning_angle(prev, contour.points[candidates[i]], next, normal);
    scored.emplace_back(std::abs(angle), candidates[i]);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

void check_splittable(const Contour& contour, std::size_t k) {
  if (k < 2) throw GeometryError("adaptive split needs k >= 2");
  if (!contour.closed) throw GeometryError("adaptive split needs a closed contour");
  if (distinct_count(contour.points) < k + 1) {
    throw GeometryError("contour too small for k = " + std::to_string(k) + " (" +
                        std::to_string(contour.points.size()) + " points)");
  }
}

// Cyclic vertex indices covered by piece j (inclusive of both split vertices).
std::vector<std::size_t> piece_indices(const std::vector<std::size_t>& splits, std::size_t j,
                                       std::size_t n) {
  const std::size_t k = splits.size();
  const std::size_t begin = splits[j];
  std::size_t end = splits[(j + 1) % k];
  if (j + 1 == k) end += n;
  std::vector<std::size_t> idx;
  for (std::size_t i = begin; i <= end; ++i) idx.push_back(i % n);
  return idx;
}

std::vector<double> chord_parameters(const std::vector<Vec3>& pts, const std::vector<std::size_t>& idx,
                                     double* span) {
  std::vector<double> t(idx.size(), 0.0);
  for (std::size_t i = 1; i < idx.size(); ++i) t[i] = t[i - 1] + (pts[idx[i]] - pts[idx[i - 1]]).norm();
  *span = t.back();
  if (!(*span > 0.0)) throw GeometryError("degenerate piece with zero chord length");
  for (double& v : t) v /= *span;
  t.back() = 1.0;
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------

double CrossSection::max_junction_gap() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    const Piece& next = pieces[(j + 1) % pieces.size()];
    worst = std::max(worst, (eval_piece(pieces[j], 1.0) - eval_piece(next, 0.0)).norm());
  }
  return worst;
}

double CrossSection::max_tangent_mismatch() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    if (junctions[j] != Junction::kSmooth) continue;
    const Piece& next = pieces[(j + 1) % pieces.size()];
    const Vec3 out = eval_piece_derivative(pieces[j], 1.0) / pieces[j].chord_span;
    const Vec3 in = eval_piece_derivative(next, 0.0) / next.chord_span;
    worst = std::max(worst, (out - in).norm());
  }
  return worst;
}

void CrossSectionSet::validate() const {
  if (sections.empty()) throw DataError("cross-section set is empty");
  const std::size_t k = sections.front().k();
  if (k < 2) throw DataError("cross-sections need at least two pieces");
  for (const CrossSection& cs : sections) {
    if (cs.k() != k) throw DataError("cross-sections in a set must share the piece count");
    if (cs.junctions.size() != cs.k()) throw DataError("junction list does not match piece count");
  }
}

std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> CrossSectionSet::stacked() const {
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> out;
  for (const CrossSection& cs : sections) {
    Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> block(kCoeffRows * cs.k(), 3);
    for (std::size_t j = 0; j < cs.k(); ++j) {
      block.middleRows(static_cast<Eigen::Index>(j) * kCoeffRows, kCoeffRows) = cs.pieces[j].coeffs;
    }
    out.push_back(std::move(block));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> douglas_peucker(const std::vector<Vec3>& points, double eps, bool closed) {
  const std::size_t n = points.size();
  if (n < 2) throw GeometryError("Douglas-Peucker needs at least two points");
  if (eps < 0.0) throw GeometryError("Douglas-Peucker tolerance must be non-negative");

  std::vector<std::size_t> order(n);
  if (!closed) {
    std::iota(order.begin(), order.end(), 0);
    return run_simplify(points, order, eps);
  }

  std::size_t a = 0, b = 1;
  double far = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (points[i] - points[j]).squaredNorm();
      if (d > far) {
        far = d;
        a = i;
        b = j;
      }
    }
  }
  std::vector<std::size_t> first, second;
  for (std::size_t i = a; i <= b; ++i) first.push_back(i);
  for (std::size_t i = b; i <= a + n; ++i) second.push_back(i % n);

  std::vector<std::size_t> kept = run_simplify(points, first, eps);
  const auto more = run_simplify(points, second, eps);
  kept.insert(kept.end(), more.begin(), more.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return kept;
}

double turning_angle(const Vec3& prev, const Vec3& at, const Vec3& next, const Vec3& normal) {
  const Vec3 u = at - prev;
  const Vec3 v = next - at;
  const Vec3 cross = u.cross(v);
  double angle = std::atan2(cross.norm(), u.dot(v)) * kRadToDeg;
  if (cross.dot(normal) < 0.0) angle = -angle;
  return std::clamp(angle, -90.0, 90.0);
}

Vec3 polygon_normal(const std::vector<Vec3>& points) {
  Vec3 n = Vec3::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    n += points[i].cross(points[(i + 1) % points.size()]);
  }
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3(Vec3::UnitZ());
}

std::vector<std::size_t> split_candidates(const Contour& contour, std::size_t k,
                                          const SplitOptions& options) {
  check_splittable(contour, k);
  const double diag = geometry::bounding_box(contour.points).diagonal();
  std::vector<std::size_t> kept;
  for (int i = 0; i <= options.max_iterations; ++i) {
    const double eps = diag / 10.0 * std::ldexp(1.0, -i);
    kept = douglas_peucker(contour.points, eps, true);
    if (kept.size() > k || kept.size() == contour.points.size()) break;
  }
  return kept;
}

std::vector<std::size_t> adaptive_split(const Contour& contour, std::size_t k,
                                        const SplitOptions& options) {
  const auto candidates = split_candidates(contour, k, options);
  if (candidates.size() < k) {
    throw GeometryError("split schedule exhausted: only " + std::to_string(candidates.size()) +
                        " endpoints survive for k = " + std::to_string(k));
  }
  return rank_by_angle(contour, candidates, k);
}

// ---------------------------------------------------------------------------

Vec3 eval_piece(const Piece& piece, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw GeometryError("piece parameter outside [0, 1]");
  Vec3 acc = piece.coeffs.row(kDegree).transpose();
  for (int i = kDegree - 1; i >= 0; --i) acc = acc * t + piece.coeffs.row(i).transpose();
  return acc;
}

Vec3 eval_piece_derivative(const Piece& piece, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw GeometryError("piece parameter outside [0, 1]");
  Vec3 acc = kDegree * piece.coeffs.row(kDegree).transpose();
  for (int i = kDegree - 1; i >= 1; --i) acc = acc * t + i * piece.coeffs.row(i).transpose();
  return acc;
}

double piece_length(const Piece& piece) {
  constexpr int kSegments = 64;
  double total = 0.0;
  Vec3 prev = eval_piece(piece, 0.0);
  for (int i = 1; i <= kSegments; ++i) {
    const Vec3 p = eval_piece(piece, static_cast<double>(i) / kSegments);
    total += (p - prev).norm();
    prev = p;
  }
  return total;
}

std::vector<Vec3> sample_cross_section(const CrossSection& cs, const SamplingConfig& cfg) {
  if (!(cfg.rho > 0.0)) throw GeometryError("sampling density must be positive");
  std::vector<Vec3> out;
  for (const Piece& piece : cs.pieces) {
    // The 1e-9 slack keeps quadrature round-off from adding a point.
    const double want = std::ceil(cfg.rho * piece_length(piece) - 1e-9);
    const auto n = static_cast<std::size_t>(std::max(2.0, want));
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(eval_piece(piece, static_cast<double>(i) / static_cast<double>(n - 1)));
    }
  }
  return out;
}

CrossSection fit_cross_section(const Contour& contour, const std::vector<std::size_t>& splits,
                               const FitOptions& options) {
  const std::size_t n = contour.points.size();
  const std::size_t k = splits.size();
  if (k < 2) throw GeometryError("fit needs at least two pieces");
  for (std::size_t j = 0; j < k; ++j) {
    if (splits[j] >= n || (j > 0 && splits[j] <= splits[j - 1])) {
      throw GeometryError("split indices must be sorted, distinct and in range");
    }
  }

  // Fit in centroid-relative coordinates so the ridge term is translation-free.
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : contour.points) centroid += p;
  centroid /= static_cast<double>(n);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (const Vec3& p : contour.points) pts.push_back(p - centroid);

  const auto unknowns = static_cast<Eigen::Index>(kCoeffRows * k);
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(unknowns, unknowns);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(unknowns, 3);
  std::vector<double> spans(k);

  for (std::size_t j = 0; j < k; ++j) {
    const auto idx = piece_indices(splits, j, n);
    const auto t = chord_parameters(pts, idx, &spans[j]);
    const Eigen::Index base = static_cast<Eigen::Index>(j) * kCoeffRows;
    for (std::size_t s = 0; s < idx.size(); ++s) {
      Eigen::Matrix<double, kCoeffRows, 1> row;
      double power = 1.0;
      for (int i = 0; i < kCoeffRows; ++i) {
        row[i] = power;
        power *= t[s];
      }
      normal.block<kCoeffRows, kCoeffRows>(base, base) += row * row.transpose();
      rhs.middleRows<kCoeffRows>(base) += row * pts[idx[s]].transpose();
    }
    if (idx.size() < static_cast<std::size_t>(kCoeffRows)) {
      normal.block<kCoeffRows, kCoeffRows>(base, base).diagonal().array() += options.ridge;
    }
  }

  std::vector<Junction> junctions(k, Junction::kCorner);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t v = splits[(j + 1) % k];
    const double turn = unsigned_turn_degrees(pts[(v + n - 1) % n], pts[v], pts[(v + 1) % n]);
    if (turn <= options.corner_angle_degrees) junctions[j] = Junction::kSmooth;
  }
  const auto smooth = static_cast<Eigen::Index>(std::count(junctions.begin(), junctions.end(), Junction::kSmooth));

  const Eigen::Index constraints = static_cast<Eigen::Index>(2 * k) + smooth;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(unknowns + constraints, unknowns + constraints);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(unknowns + constraints, 3);
  kkt.topLeftCorner(unknowns, unknowns) = normal;
  b.topRows(unknowns) = rhs;

  Eigen::Index row = unknowns;
  auto add_constraint = [&](const Eigen::RowVectorXd& c, const Vec3& value) {
    kkt.block(row, 0, 1, unknowns) = c;
    kkt.block(0, row, unknowns, 1) = c.transpose();
    b.row(row) = value.transpose();
    ++row;
  };
  for (std::size_t j = 0; j < k; ++j) {
    const Eigen::Index base = static_cast<Eigen::Index>(j) * kCoeffRows;
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(unknowns);
    c[base] = 1.0;
    add_constraint(c, pts[splits[j]]);
    c.setZero();
    c.segment<kCoeffRows>(base).setOnes();
    add_constraint(c, pts[splits[(j + 1) % k]]);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (junctions[j] != Junction::kSmooth) continue;
    const std::size_t next = (j + 1) % k;
    const Eigen::Index base = static_cast<Eigen::Index>(j) * kCoeffRows;
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(unknowns);
    for (int i = 1; i < kCoeffRows; ++i) c[base + i] = i / spans[j];
    c[static_cast<Eigen::Index>(next) * kCoeffRows + 1] -= 1.0 / spans[next];
    add_constraint(c, Vec3::Zero());
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) throw GeometryError("cross-section fit is rank deficient");
  const Eigen::MatrixXd solution = lu.solve(b);
  if (!solution.allFinite()) throw GeometryError("cross-section fit produced non-finite coefficients");

  CrossSection cs;
  cs.plane = contour.plane;
  cs.junctions = std::move(junctions);
  cs.pieces.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    Piece& piece = cs.pieces[j];
    piece.coeffs = solution.middleRows<kCoeffRows>(static_cast<Eigen::Index>(j) * kCoeffRows);
    piece.coeffs.row(0) += centroid.transpose();
    piece.chord_span = spans[j];
  }
  return cs;
}

double max_fit_residual(const Contour& contour, const std::vector<std::size_t>& splits,
                        const CrossSection& cs) {
  const std::size_t n = contour.points.size();
  double worst = 0.0;
  for (std::size_t j = 0; j < splits.size(); ++j) {
    const auto idx = piece_indices(splits, j, n);
    double span = 0.0;
    const auto t = chord_parameters(contour.points, idx, &span);
    for (std::size_t s = 0; s < idx.size(); ++s) {
      worst = std::max(worst, (eval_piece(cs.pieces[j], t[s]) - contour.points[idx[s]]).norm());
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

Contour upsample_contour(const Contour& contour, std::size_t min_points) {
  Contour out = contour;
  auto& pts = out.points;
  while (pts.size() < min_points && pts.size() >= 2) {
    std::size_t longest = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double len = (pts[(i + 1) % pts.size()] - pts[i]).norm();
      if (len > best) {
        best = len;
        longest = i;
      }
    }
    const Vec3 mid = 0.5 * (pts[longest] + pts[(longest + 1) % pts.size()]);
    pts.insert(pts.begin() + static_cast<std::ptrdiff_t>(longest + 1), mid);
  }
  out.update_length();
  return out;
}

EncodedContour encode_contour(const Contour& contour, const EncodeOptions& options) {
  const std::size_t k = options.k;
  EncodedContour enc;
  const std::size_t target = std::max(k + 1, options.density_factor * k);
  if (contour.points.size() < target) {
    enc.contour = upsample_contour(contour, target);
    enc.upsampled = true;
  } else {
    enc.contour = contour;
  }
  const auto& pts = enc.contour.points;
  const std::size_t n = pts.size();

  auto candidates = split_candidates(enc.contour, k, options.split);
  if (candidates.size() >= k) {
    enc.splits = rank_by_angle(enc.contour, candidates, k);
  } else {
    enc.splits = candidates;
    std::vector<double> arc(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) arc[i + 1] = arc[i] + (pts[(i + 1) % n] - pts[i]).norm();
    auto arc_at = [&](std::size_t i) { return i <= n ? arc[i] : arc[n] + arc[i - n]; };
    while (enc.splits.size() < k) {
      // Bisect the longest piece (by arc length) at its middle vertex.
      const std::size_t c = enc.splits.size();
      double best = -1.0;
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < c; ++j) {
        const std::size_t a = enc.splits[j];
        const std::size_t b = j + 1 < c ? enc.splits[j + 1] : enc.splits[0] + n;
        const double len = arc_at(b) - arc_at(a);
        if (b > a + 1 && len > best) {
          best = len;
          best_j = j;
        }
      }
      if (best < 0.0) throw GeometryError("cannot place k split vertices on contour");
      const std::size_t a = enc.splits[best_j];
      const std::size_t b = best_j + 1 < c ? enc.splits[best_j + 1] : enc.splits[0] + n;
      const double half = arc_at(a) + 0.5 * (arc_at(b) - arc_at(a));
      std::size_t pick = a + 1;
      double gap = std::abs(arc_at(pick) - half);
      for (std::size_t i = a + 2; i < b; ++i) {
        const double g = std::abs(arc_at(i) - half);
        if (g < gap) {
          gap = g;
          pick = i;
        }
      }
      enc.splits.push_back(pick % n);
      std::sort(enc.splits.begin(), enc.splits.end());
      ++enc.topped_up;
    }
  }
  enc.section = fit_cross_section(enc.contour, enc.splits, options.fit);
  enc.max_residual = max_fit_residual(enc.contour, enc.splits, enc.section);
  return enc;
}

}  // namespace curvy::splitfit
