#pragma once

#include "magneto/constraints.hpp"
#include "magneto/mesh_ops.hpp"
#include "magneto/tri_mesh.hpp"

namespace magneto {

// The screen/cell sandwich around a model. Cells live in `body`, between its
// outer surface `m_prime` and its inner surface `body_inner`.
struct ShellModel {
    TriMesh m;
    TriMesh m_prime;
    TriMesh body_inner;
    TriMesh s_out;
    TriMesh s_in;
    TriMesh body;
    // Open input sheet extruded along its normals instead of double offsetting.
    bool single_sided = false;
    Warnings warnings;
};

enum class ShellMode {
    Auto,       // closed inputs get a double offset, open sheets are extruded
    SingleSided // closed inputs contribute only their upward-facing surface
};

// Closed inputs are offset outward (M' = M + H_cell, screens H_os either
// side); with `offset_inward` the stack is built inside M so M stays the
// exterior. Open manifold sheets are extruded single-sided as
// [S_in | body | S_out] along their normals.
//
// Throws SpecInvalid, NotClosed (neither closed nor a manifold sheet) and
// OffsetCollapse.
ShellModel build_shell(const TriMesh &m, const CellSpec &spec, const PrinterProfile &profile = {},
                       ShellMode mode = ShellMode::Auto);

// Faces whose normal points within ~25 degrees of +Z, as an open sheet.
// Throws NotClosed when no such face exists.
TriMesh upward_surface(const TriMesh &m);

// Closed solid between offset(sheet, lo) and offset(sheet, hi), lo < hi,
// with side walls along the sheet boundary.
TriMesh extrude_sheet(const TriMesh &sheet, double lo, double hi);

// Solid between two nested closed surfaces, outer enclosing inner.
TriMesh layer_between(const TriMesh &outer, const TriMesh &inner);

// S_out ∪ body ∪ S_in as one closed mesh (shared surfaces cancelled).
TriMesh shell_union(const ShellModel &shell);

} // namespace magneto
