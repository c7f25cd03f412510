#pragma once

#include "magneto/tri_mesh.hpp"

#include <string>
#include <vector>

namespace magneto {

using Warnings = std::vector<std::string>;

// Moves every vertex so that it sits `distance` from its incident face
// planes (outward for positive values). Connectivity is preserved. Throws OffsetCollapse when a face flips; a
// self-intersecting result is only reported through `warnings`.
TriMesh offset_mesh(const TriMesh &mesh, double distance, Warnings *warnings = nullptr);

// Pairs of non-adjacent faces whose interiors intersect.
std::size_t count_self_intersections(const TriMesh &mesh, std::size_t stop_after = 1);

// Closed 2D loop; outer loops are counter-clockwise, holes clockwise.
using Loop = std::vector<Vec2>;

struct PlanarSection {
    double z = 0.0;
    std::vector<Loop> loops;

    double area() const; // signed sum, holes negative
};

double signed_area(const Loop &loop);

// Horizontal cross-section of a closed mesh. A plane passing through a vertex
// is lifted by 1e-6 mm. Throws EmptySection when the plane misses the solid.
PlanarSection slice_at(const TriMesh &mesh, double z);

double volume(const TriMesh &mesh);

// Volume of the part of the solid below the horizontal plane at z.
double partial_volume_below(const TriMesh &mesh, double z);

} // namespace magneto
