#pragma once

#include <cstdint>
#include <vector>

#include "curvy/geometry.hpp"
#include "curvy/splitfit.hpp"

// Mesh -> planes -> contours -> fitted cross-section set.
namespace curvy::pipeline {

struct SectionOptions {
  std::size_t planes = 10;
  geometry::PlaneStrategy strategy = geometry::PlaneStrategy::kAxisAligned;
  int axis = 2;
  std::uint64_t seed = 0;
  /// Contours are densified to at least ceil(rho * length) vertices before
  /// splitting. Zero disables.
  double rho = 0.0;
  splitfit::EncodeOptions encode;
  geometry::SliceOptions slice;
};

struct SectionResult {
  splitfit::CrossSectionSet set;
  std::vector<splitfit::EncodedContour> encoded;
  std::vector<geometry::Plane> planes;
  std::size_t empty_planes = 0;  // planes that missed the mesh
};

/// Slices a normalized mesh and encodes every resulting contour as one
/// cross-section. Throws GeometryError when no plane produced a contour.
SectionResult cross_sections(const geometry::TriangleMesh& mesh, const SectionOptions& options);

/// Densifies by midpoint insertion to ceil(rho * length) vertices.
geometry::Contour densify(const geometry::Contour& contour, double rho);

}  // namespace curvy::pipeline
