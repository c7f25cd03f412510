#pragma once

#include "magneto/tri_mesh.hpp"

namespace magneto::primitives {

// Axis-aligned box with each face split into `divisions` x `divisions` quads.
TriMesh box(const Vec3 &lo, const Vec3 &hi, int divisions = 1);

// Geodesic sphere: icosahedron with every face split into `frequency`^2
// triangles, projected onto the sphere.
TriMesh icosphere(const Vec3 &center, double radius, int frequency);

// Closed frustum along +Z from `base_z`; a zero top radius yields a cone.
TriMesh frustum(double bottom_radius, double top_radius, double height, int segments, double base_z = 0.0);

TriMesh torus(double major_radius, double minor_radius, int major_segments, int minor_segments);

// Open rectangular sheet in the z = 0 plane, normals +Z, `nx` x `ny` quads.
TriMesh sheet(double width, double depth, int nx, int ny, const Vec2 &origin = Vec2::Zero());

} // namespace magneto::primitives
