#pragma once

#include "magneto/tri_mesh.hpp"

namespace magneto {

enum class BooleanOp { Union, Intersection, Difference };

// Boolean of two closed meshes. Faces are split along their intersection
// curves, pieces are kept or dropped by containment in the other operand and
// stitched through shared intersection vertices. Inputs in degenerate
// relative position (touching vertices, coplanar overlaps) are retried after
// a rigid perturbation of `b` far below print resolution.
//
// Throws BooleanFailure when an operand is not closed or the result cannot be
// made watertight. An empty intersection returns an empty mesh.
TriMesh boolean(const TriMesh &a, const TriMesh &b, BooleanOp op);

} // namespace magneto
