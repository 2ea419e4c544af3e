#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvy/geometry.hpp"

// Procedural watertight meshes used as fixtures and as the synthetic corpus.
namespace curvy::shapes {

using geometry::TriangleMesh;
using geometry::Vec3;

TriangleMesh box(const Vec3& size);
TriangleMesh cube();  // [0,1]^3
TriangleMesh tetrahedron();
TriangleMesh icosphere(int subdivisions);
TriangleMesh ellipsoid(const Vec3& radii, int subdivisions);
TriangleMesh torus(double major, double minor, int rings, int sides);

/// Rotation about `axis` by `angle` radians.
TriangleMesh rotated(const TriangleMesh& mesh, const Vec3& axis, double angle);

struct ToyShape {
  std::string id;
  std::string class_label;
  TriangleMesh mesh;  // normalized
};

/// Seeded corpus cycling through the classes sphere, box and ellipsoid.
std::vector<ToyShape> toy_corpus(std::size_t count, std::uint64_t seed);

}  // namespace curvy::shapes
