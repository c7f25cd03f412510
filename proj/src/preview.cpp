#include "magneto/preview.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace magneto {

namespace {

double rounded(double v) { return std::round(v * 1e4) / 1e4 + 0.0; }

Json vec_json(const Vec3 &v) { return Json::array({rounded(v.x()), rounded(v.y()), rounded(v.z())}); }

Json indexed_json(const TriMesh &mesh)
{
    Json positions = Json::array(), indices = Json::array();
    for (const Vec3 &v : mesh.vertices())
        for (int k = 0; k < 3; ++k)
            positions.push_back(rounded(v[k]));
    for (const Face &f : mesh.faces())
        for (int k = 0; k < 3; ++k)
            indices.push_back(f[static_cast<std::size_t>(k)]);
    return {{"positions", positions}, {"indices", indices}, {"triangle_count", mesh.face_count()}};
}

Json soup_json(const TriMesh &mesh)
{
    Json out = Json::array();
    for (std::size_t f = 0; f < mesh.face_count(); ++f)
        for (const Vec3 &v : mesh.triangle(f))
            for (int k = 0; k < 3; ++k)
                out.push_back(rounded(v[k]));
    return out;
}

TriMesh cluster(const TriMesh &mesh, double size)
{
    const Vec3 lo = mesh.bounds().lo;
    std::map<std::array<long, 3>, int> ids;
    std::vector<Vec3> sums;
    std::vector<int> counts, remap(mesh.vertex_count());
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
        const Vec3 q = (mesh.vertices()[i] - lo) / size;
        const std::array<long, 3> key{std::lround(std::floor(q.x())), std::lround(std::floor(q.y())),
                                      std::lround(std::floor(q.z()))};
        auto [it, fresh] = ids.emplace(key, static_cast<int>(sums.size()));
        if (fresh) {
            sums.push_back(Vec3::Zero());
            counts.push_back(0);
        }
        sums[static_cast<std::size_t>(it->second)] += mesh.vertices()[i];
        ++counts[static_cast<std::size_t>(it->second)];
        remap[i] = it->second;
    }
    for (std::size_t c = 0; c < sums.size(); ++c)
        sums[c] /= counts[c];
    std::vector<Face> faces;
    std::set<std::array<int, 3>> seen;
    for (const Face &f : mesh.faces()) {
        Face g{remap[static_cast<std::size_t>(f[0])], remap[static_cast<std::size_t>(f[1])],
               remap[static_cast<std::size_t>(f[2])]};
        if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2])
            continue;
        std::array<int, 3> key{g[0], g[1], g[2]};
        std::sort(key.begin(), key.end());
        if (seen.insert(key).second)
            faces.push_back(g);
    }
    return TriMesh(std::move(sums), std::move(faces));
}

} // namespace

TriMesh decimate(const TriMesh &mesh, std::size_t max_faces)
{
    if (mesh.face_count() <= max_faces)
        return mesh;
    // Start near the spacing that would give the budget on a uniform surface.
    double size = std::sqrt(mesh.surface_area() / static_cast<double>(std::max<std::size_t>(max_faces, 1)));
    for (;;) {
        TriMesh out = cluster(mesh, size);
        if (out.face_count() <= max_faces)
            return out;
        size *= 1.25;
    }
}

void translate_display(DisplayModel &model, const Vec3 &offset)
{
    ShellModel &s = model.shell;
    for (TriMesh *m : {&s.m, &s.m_prime, &s.body_inner, &s.s_out, &s.s_in, &s.body, &model.printable})
        if (!m->empty())
            *m = m->translated(offset);
    for (Cell &c : model.cells) {
        c.center += offset;
        for (Vec3 &p : c.outer)
            p += offset;
        for (Vec3 &p : c.inner)
            p += offset;
        if (!c.solid.empty())
            c.solid = c.solid.translated(offset);
    }
}

Vec3 print_frame_offset(const DisplayModel &model, const PrinterProfile &profile)
{
    Aabb box;
    if (!model.printable.empty()) {
        box = model.printable.bounds();
    } else {
        for (const TriMesh *m : {&model.shell.s_out, &model.shell.s_in, &model.shell.body})
            if (!m->empty()) {
                box.extend(m->bounds().lo);
                box.extend(m->bounds().hi);
            }
    }
    const Vec3 center = 0.5 * (box.lo + box.hi);
    return {0.5 * profile.bed_size.x() - center.x(), 0.5 * profile.bed_size.y() - center.y(), -box.lo.z()};
}

Json preview_json(const DisplayModel &model, const InjectionPlan *plan)
{
    std::set<int> unplannable;
    if (plan)
        for (const Unplannable &u : plan->unplannable)
            unplannable.insert(u.cell_id);

    // Split the budget between the two shell surfaces by their size.
    const TriMesh &outer = model.shell.m_prime, &inner = model.shell.m;
    const std::size_t total = std::max<std::size_t>(outer.face_count() + inner.face_count(), 1);
    const std::size_t outer_budget = kPreviewTriangleBudget * outer.face_count() / total;
    const TriMesh outer_preview = decimate(outer, outer_budget);
    const TriMesh inner_preview = decimate(inner, kPreviewTriangleBudget - outer_budget);

    Json cells = Json::array();
    for (const Cell &c : model.cells) {
        const std::string status(to_string(c.status));
        cells.push_back({{"id", c.id},
                         {"status", status},
                         {"display_status", unplannable.count(c.id) ? std::string("unplannable") : status},
                         {"center", vec_json(c.center)},
                         {"normal", vec_json(c.normal)},
                         {"volume_mm3", rounded(c.volume)},
                         {"triangles", soup_json(c.solid)}});
    }
    Json report = to_json(model.report);
    report["unplannable"] = unplannable.size();
    return {{"units", "mm"},
            {"status_colors",
             {{"ok", "#2e7d32"},
              {"shrunk", "#f9a825"},
              {"overlapping", "#c62828"},
              {"boolean_failed", "#6a1b9a"},
              {"projection_miss", "#546e7a"},
              {"unplannable", "#ef6c00"}}},
            {"shell",
             {{"display_surface", indexed_json(outer_preview)},
              {"body_surface", indexed_json(inner_preview)},
              {"decimated", outer_preview.face_count() < outer.face_count() ||
                                inner_preview.face_count() < inner.face_count()}}},
            {"cells", cells},
            {"report", report},
            {"overlaps",
             {{"initial_pairs", model.overlaps.initial_pairs},
              {"initial_intersecting", model.overlaps.initial_intersecting},
              {"cells_intersecting", model.overlaps.cells_intersecting},
              {"rounds", model.overlaps.rounds}}},
            {"warnings", model.warnings}};
}

} // namespace magneto
