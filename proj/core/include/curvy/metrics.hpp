#pragma once

#include <cstddef>
#include <vector>

#include "curvy/geometry.hpp"

namespace curvy::metrics {

using geometry::PointSet;

struct NearestResult {
  std::vector<double> sq_dist;     // per query point
  std::vector<std::size_t> index;  // nearest target row; smallest index on ties
};

/// Uniform-grid hash over a target point set. Queries return the exact
/// nearest neighbour (identical to a linear scan, including tie-breaking).
class PointGrid {
 public:
  explicit PointGrid(const PointSet& targets);

  /// (index, squared distance) of the nearest target.
  std::pair<std::size_t, double> nearest(const geometry::Vec3& query) const;

 private:
  std::size_t cell_index(long x, long y, long z) const;

  const PointSet* targets_;
  geometry::Vec3 origin_;
  double cell_ = 1.0;
  long dims_[3] = {1, 1, 1};
  std::vector<std::size_t> cell_start_;  // CSR layout over cells
  std::vector<std::size_t> entries_;
};

NearestResult nearest_neighbors(const PointSet& queries, const PointSet& targets);
NearestResult nearest_neighbors_brute(const PointSet& queries, const PointSet& targets);

/// (1/a) sum_p min_q |p-q|^2 + (1/b) sum_q min_p |q-p|^2
double chamfer(const PointSet& p, const PointSet& q);
double chamfer_brute(const PointSet& p, const PointSet& q);

/// max_p min_q |p-q| (unsquared)
double directed_hausdorff(const PointSet& from, const PointSet& to);
double hausdorff(const PointSet& p, const PointSet& q);
double hausdorff_brute(const PointSet& p, const PointSet& q);

PointSet to_point_set(const std::vector<geometry::Vec3>& points);

}  // namespace curvy::metrics
