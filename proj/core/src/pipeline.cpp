#include "curvy/pipeline.hpp"

#include <cmath>

#include "curvy/error.hpp"

namespace curvy::pipeline {

geometry::Contour densify(const geometry::Contour& contour, double rho) {
  if (!(rho > 0.0)) return contour;
  const auto target = static_cast<std::size_t>(std::ceil(rho * contour.length - 1e-9));
  if (target <= contour.points.size()) return contour;
  return splitfit::upsample_contour(contour, target);
}

SectionResult cross_sections(const geometry::TriangleMesh& mesh, const SectionOptions& options) {
  if (options.planes == 0) throw UsageError("plane count must be at least 1");
  SectionResult result;
  result.planes = geometry::sample_planes(mesh, options.planes, options.strategy, options.axis, options.seed);
  for (const auto& plane : result.planes) {
    const auto contours = geometry::slice_mesh(mesh, plane, options.slice);
    if (contours.empty()) ++result.empty_planes;
    for (const auto& c : contours) {
      auto encoded = splitfit::encode_contour(densify(c, options.rho), options.encode);
      result.set.sections.push_back(encoded.section);
      result.encoded.push_back(std::move(encoded));
    }
  }
  if (result.set.sections.empty()) throw GeometryError("no plane intersects the mesh");
  result.set.validate();
  return result;
}

}  // namespace curvy::pipeline
