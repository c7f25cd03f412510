#include "magneto/shell.hpp"

#include "magneto/error.hpp"

#include <array>

namespace magneto {

TriMesh layer_between(const TriMesh &outer, const TriMesh &inner)
{
    const TriMesh parts[] = {outer, inner.flipped()};
    return concatenate(parts);
}

TriMesh extrude_sheet(const TriMesh &sheet, double lo, double hi)
{
    const TriMesh bottom = offset_mesh(sheet, lo);
    const TriMesh top = offset_mesh(sheet, hi);
    const int n = static_cast<int>(sheet.vertex_count());
    std::vector<Vec3> verts = top.vertices();
    verts.insert(verts.end(), bottom.vertices().begin(), bottom.vertices().end());
    std::vector<Face> faces = sheet.faces();
    for (const Face &f : sheet.faces())
        faces.push_back({f[0] + n, f[2] + n, f[1] + n});
    // A boundary edge a->b runs counter-clockwise seen from the sheet's front,
    // so the outward wall is (a, a', b') + (a, b', b) with ' on the bottom.
    for (const DirectedEdge &e : boundary_edges(sheet)) {
        faces.push_back({e.from, e.from + n, e.to + n});
        faces.push_back({e.from, e.to + n, e.to});
    }
    return TriMesh(std::move(verts), std::move(faces));
}

TriMesh upward_surface(const TriMesh &m)
{
    std::vector<Face> faces;
    for (std::size_t f = 0; f < m.face_count(); ++f)
        if (m.face_normal(f).z() > 0.9)
            faces.push_back(m.faces()[f]);
    if (faces.empty())
        throw Error(ErrorCode::NotClosed, "mesh has no upward-facing surface");
    return weld(m.vertices(), faces, 1e-6);
}

ShellModel build_shell(const TriMesh &input, const CellSpec &spec, const PrinterProfile &profile, ShellMode mode)
{
    require_valid(spec, profile);
    const TriMesh m = mode == ShellMode::SingleSided && input.is_closed() ? upward_surface(input) : input;
    const double hc = spec.cell_depth, hos = spec.screen_thickness;
    ShellModel shell;
    shell.m = m;

    if (!m.is_closed()) {
        if (m.empty() || m.non_manifold_edge_count() > 0 || m.boundary_edge_count() == 0 ||
            m.degenerate_face_count() > 0)
            throw Error(ErrorCode::NotClosed, "input is neither a closed solid nor a manifold open sheet");
        shell.single_sided = true;
        const double base = profile.offset_inward ? -(2.0 * hos + hc) : 0.0;
        const std::array<double, 4> level = {base, base + hos, base + hos + hc, base + 2.0 * hos + hc};
        shell.s_in = extrude_sheet(m, level[0], level[1]);
        shell.body = extrude_sheet(m, level[1], level[2]);
        shell.s_out = extrude_sheet(m, level[2], level[3]);
        shell.body_inner = offset_mesh(m, level[1]);
        shell.m_prime = offset_mesh(m, level[2]);
        return shell;
    }

    // Four nested surfaces from the innermost inward screen face to the
    // outermost screen face.
    TriMesh surfaces[4];
    Warnings w[4];
    if (profile.offset_inward) {
        surfaces[3] = m;
        surfaces[2] = offset_mesh(m, -hos, &w[2]);
        surfaces[1] = offset_mesh(surfaces[2], -hc, &w[1]);
        surfaces[0] = offset_mesh(surfaces[1], -hos, &w[0]);
    } else {
        surfaces[1] = m;
#pragma omp parallel sections
        {
#pragma omp section
            {
                surfaces[2] = offset_mesh(m, hc, &w[2]);
                surfaces[3] = offset_mesh(surfaces[2], hos, &w[3]);
            }
#pragma omp section
            surfaces[0] = offset_mesh(m, -hos, &w[0]);
        }
    }
    for (const Warnings &ws : w)
        shell.warnings.insert(shell.warnings.end(), ws.begin(), ws.end());
    shell.body_inner = surfaces[1];
    shell.m_prime = surfaces[2];
    shell.s_in = layer_between(surfaces[1], surfaces[0]);
    shell.body = layer_between(surfaces[2], surfaces[1]);
    shell.s_out = layer_between(surfaces[3], surfaces[2]);
    for (const TriMesh *part : {&shell.s_in, &shell.body, &shell.s_out})
        if (!part->is_closed())
            throw Error(ErrorCode::OffsetCollapse, "shell layer is not a closed solid");
    return shell;
}

TriMesh shell_union(const ShellModel &shell)
{
    const TriMesh parts[] = {shell.s_out, shell.body, shell.s_in};
    return union_touching(parts);
}

} // namespace magneto
