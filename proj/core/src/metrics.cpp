#include "curvy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "curvy/error.hpp"

namespace curvy::metrics {

namespace {

inline double sq_distance(const PointSet& pts, Eigen::Index row, const geometry::Vec3& q) {
  const double dx = pts(row, 0) - q.x();
  const double dy = pts(row, 1) - q.y();
  const double dz = pts(row, 2) - q.z();
  return dx * dx + dy * dy + dz * dz;
}

void require_points(const PointSet& p, const char* what) {
  if (p.rows() == 0) throw DataError(std::string(what) + ": empty point set");
}

}  // namespace

PointGrid::PointGrid(const PointSet& targets) : targets_(&targets) {
  require_points(targets, "nearest neighbour index");
  const geometry::Vec3 lo = targets.colwise().minCoeff().transpose();
  const geometry::Vec3 hi = targets.colwise().maxCoeff().transpose();
  const geometry::Vec3 extent = hi - lo;
  const double n = static_cast<double>(targets.rows());
  // About one point per cell; degenerate axes collapse to a single cell.
  const double longest = std::max(extent.maxCoeff(), 1e-12);
  cell_ = std::max(longest / std::max(1.0, std::cbrt(n)), 1e-12);
  origin_ = lo;
  for (int a = 0; a < 3; ++a) {
    dims_[a] = std::clamp<long>(static_cast<long>(extent[a] / cell_) + 1, 1, 1024);
  }

  const std::size_t cells = static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
  std::vector<std::size_t> cell_of(static_cast<std::size_t>(targets.rows()));
  std::vector<std::size_t> counts(cells + 1, 0);
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    long c[3];
    for (int a = 0; a < 3; ++a) {
      c[a] = std::clamp<long>(static_cast<long>((targets(i, a) - origin_[a]) / cell_), 0, dims_[a] - 1);
    }
    cell_of[static_cast<std::size_t>(i)] = cell_index(c[0], c[1], c[2]);
    ++counts[cell_of[static_cast<std::size_t>(i)] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) counts[c + 1] += counts[c];
  cell_start_ = counts;
  entries_.resize(static_cast<std::size_t>(targets.rows()));
  std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
  for (std::size_t i = 0; i < cell_of.size(); ++i) entries_[fill[cell_of[i]]++] = i;
}

std::size_t PointGrid::cell_index(long x, long y, long z) const {
  return static_cast<std::size_t>((z * dims_[1] + y) * dims_[0] + x);
}

std::pair<std::size_t, double> PointGrid::nearest(const geometry::Vec3& query) const {
  constexpr double kFar = 1e15;  // keeps cell coordinates representable
  long home[3];
  long first_ring = 0;  // rings below this hold no cells
  long last_ring = 0;   // this ring covers the whole grid
  for (int a = 0; a < 3; ++a) {
    home[a] = static_cast<long>(std::clamp(std::floor((query[a] - origin_[a]) / cell_), -kFar, kFar));
    const long below = -home[a];
    const long above = home[a] - (dims_[a] - 1);
    first_ring = std::max({first_ring, below, above});
    last_ring = std::max({last_ring, home[a], dims_[a] - 1 - home[a]});
  }
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d = std::numeric_limits<double>::infinity();

  for (long r = first_ring; r <= last_ring; ++r) {
    // Visit the shell of cells at Chebyshev distance r from `home`.
    const long z0 = std::max(0L, home[2] - r), z1 = std::min(dims_[2] - 1, home[2] + r);
    const long y0 = std::max(0L, home[1] - r), y1 = std::min(dims_[1] - 1, home[1] + r);
    for (long z = z0; z <= z1; ++z) {
      for (long y = y0; y <= y1; ++y) {
        const bool face = std::labs(z - home[2]) == r || std::labs(y - home[1]) == r;
        auto visit = [&](long x) {
          if (x < 0 || x >= dims_[0]) return;
          const std::size_t c = cell_index(x, y, z);
          for (std::size_t e = cell_start_[c]; e < cell_start_[c + 1]; ++e) {
            const std::size_t idx = entries_[e];
            const double d = sq_distance(*targets_, static_cast<Eigen::Index>(idx), query);
            if (d < best_d || (d == best_d && idx < best)) {
              best_d = d;
              best = idx;
            }
          }
        };
        if (face) {
          const long x0 = std::max(0L, home[0] - r), x1 = std::min(dims_[0] - 1, home[0] + r);
          for (long x = x0; x <= x1; ++x) visit(x);
        } else {
          visit(home[0] - r);
          if (r > 0) visit(home[0] + r);
        }
      }
    }
    // Anything outside the visited block is at least r cells away.
    const double bound = static_cast<double>(r) * cell_;
    if (best != std::numeric_limits<std::size_t>::max() && best_d < bound * bound) break;
  }
  return {best, best_d};
}

NearestResult nearest_neighbors(const PointSet& queries, const PointSet& targets) {
  require_points(queries, "nearest neighbours");
  const PointGrid grid(targets);
  NearestResult out;
  out.sq_dist.resize(static_cast<std::size_t>(queries.rows()));
  out.index.resize(static_cast<std::size_t>(queries.rows()));
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const auto [idx, d] = grid.nearest(queries.row(i).transpose());
    out.index[static_cast<std::size_t>(i)] = idx;
    out.sq_dist[static_cast<std::size_t>(i)] = d;
  }
  return out;
}

NearestResult nearest_neighbors_brute(const PointSet& queries, const PointSet& targets) {
  require_points(queries, "nearest neighbours");
  require_points(targets, "nearest neighbours");
  NearestResult out;
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const geometry::Vec3 q = queries.row(i).transpose();
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < targets.rows(); ++j) {
      const double d = sq_distance(targets, j, q);
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::size_t>(j);
      }
    }
    out.index.push_back(best);
    out.sq_dist.push_back(best_d);
  }
  return out;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

double max_sqrt(const std::vector<double>& v) {
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, x);
  return std::sqrt(worst);
}

}  // namespace

double chamfer(const PointSet& p, const PointSet& q) {
  return mean_of(nearest_neighbors(p, q).sq_dist) + mean_of(nearest_neighbors(q, p).sq_dist);
}

double chamfer_brute(const PointSet& p, const PointSet& q) {
  return mean_of(nearest_neighbors_brute(p, q).sq_dist) + mean_of(nearest_neighbors_brute(q, p).sq_dist);
}

double directed_hausdorff(const PointSet& from, const PointSet& to) {
  return max_sqrt(nearest_neighbors(from, to).sq_dist);
}

double hausdorff(const PointSet& p, const PointSet& q) {
  return std::max(directed_hausdorff(p, q), directed_hausdorff(q, p));
}

double hausdorff_brute(const PointSet& p, const PointSet& q) {
  return std::max(max_sqrt(nearest_neighbors_brute(p, q).sq_dist),
                  max_sqrt(nearest_neighbors_brute(q, p).sq_dist));
}

PointSet to_point_set(const std::vector<geometry::Vec3>& points) {
  PointSet out(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  return out;
}

}  // namespace curvy::metrics
