#include "magneto/cells.hpp"

#include "magneto/boolean.hpp"
#include "magneto/convex.hpp"
#include "magneto/error.hpp"
#include "magneto/intersect.hpp"
#include "magneto/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace magneto {

namespace {

constexpr int kCircleSegments = 24;
constexpr double kMaxPitchToExtent = 0.75;
// Perspective ratios this close to 1 are lofted as prisms.
constexpr double kParallelBand = 0.02;
// A normal ray must reach the inner surface within this many cell depths.
constexpr double kMaxDepthFactor = 3.0;
// Interpolated normals are trusted only on faces whose vertex normals stay
// within this angle of the face normal (cosine); sharp edges use face normals.
const double kSmoothCos = std::cos(30.0 * std::numbers::pi / 180.0);

// Nearest hit of the line through p along dir, or nothing within reach.
std::optional<LineHit> nearest_hit(const Bvh &bvh, const Vec3 &p, const Vec3 &dir, double reach)
{
    std::optional<LineHit> best;
    for (const LineHit &h : bvh.line_hits(p, dir))
        if (std::abs(h.t) <= reach && (!best || std::abs(h.t) < std::abs(best->t)))
            best = h;
    return best;
}

Vec3 surface_normal(const Bvh &bvh, const LineHit &hit)
{
    const TriMesh &m = bvh.mesh();
    const Vec3 fn = m.face_normal(static_cast<std::size_t>(hit.face));
    const Face &f = m.faces()[static_cast<std::size_t>(hit.face)];
    for (int v : f)
        if (m.vertex_normals()[static_cast<std::size_t>(v)].dot(fn) < kSmoothCos)
            return fn;
    return bvh.normal_at(hit);
}

// Regular polygon around the origin of the (u, v) frame, counter-clockwise.
std::vector<Vec2> cross_section_polygon(CellShape shape, double size)
{
    const int n = polygon_sides(shape);
    const double r = polygon_circumradius(shape, size);
    // Squares put an edge midpoint toward +u so they tile the lattice axes.
    const double start = shape == CellShape::Square ? std::numbers::pi / 4.0 : 0.0;
    std::vector<Vec2> pts;
    for (int k = 0; k < n; ++k) {
        const double a = start + 2.0 * std::numbers::pi * k / n;
        pts.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    return pts;
}

TriMesh loft(const std::vector<Vec3> &outer, const std::vector<Vec3> &inner)
{
    const int n = static_cast<int>(outer.size());
    std::vector<Vec3> verts = outer;
    verts.insert(verts.end(), inner.begin(), inner.end());
    std::vector<Face> faces;
    for (int k = 1; k + 1 < n; ++k) {
        faces.push_back({0, k, k + 1});
        faces.push_back({n, n + k + 1, n + k});
    }
    for (int k = 0; k < n; ++k) {
        const int next = (k + 1) % n;
        faces.push_back({k, n + k, n + next});
        faces.push_back({k, n + next, next});
    }
    return TriMesh(std::move(verts), std::move(faces));
}

Aabb cell_box(const Cell &c)
{
    Aabb box;
    for (const Vec3 &p : c.outer)
        box.extend(p);
    for (const Vec3 &p : c.inner)
        box.extend(p);
    return box;
}

// Point strictly inside a convex closed solid (all face planes).
bool inside_convex(const TriMesh &solid, const Vec3 &p, double eps)
{
    for (std::size_t f = 0; f < solid.face_count(); ++f) {
        const Vec3 n = solid.face_normal(f);
        if (n.dot(p - solid.triangle(f)[0]) > -eps)
            return false;
    }
    return true;
}

} // namespace

std::string_view to_string(CellStatus status)
{
    switch (status) {
    case CellStatus::Ok: return "ok";
    case CellStatus::Shrunk: return "shrunk";
    case CellStatus::Overlapping: return "overlapping";
    case CellStatus::BooleanFailed: return "boolean_failed";
    case CellStatus::ProjectionMiss: return "projection_miss";
    }
    return "unknown";
}

ShellIndex::ShellIndex(const ShellModel &shell)
    : shell_(&shell), outer_(shell.m_prime), inner_(shell.body_inner)
{
}

int polygon_sides(CellShape shape)
{
    switch (shape) {
    case CellShape::Circle: return kCircleSegments;
    case CellShape::Square: return 4;
    case CellShape::Hexagon: return 6;
    }
    return 0;
}

double polygon_circumradius(CellShape shape, double size)
{
    switch (shape) {
    case CellShape::Circle: {
        // Same area as the nominal circle.
        const double n = kCircleSegments;
        return 0.5 * size * std::sqrt(2.0 * std::numbers::pi / (n * std::sin(2.0 * std::numbers::pi / n)));
    }
    case CellShape::Square: return size / std::sqrt(2.0);
    case CellShape::Hexagon: return 0.5 * size;
    }
    return 0.0;
}

std::vector<Placement> place_cells(const ShellModel &shell, const CellSpec &spec, const PrinterProfile &profile)
{
    const double pitch = spec.pitch();
    // No near-uniform triangulation has edges this long relative to the body.
    if (pitch > kMaxPitchToExtent * shell.m_prime.bounds().extent().maxCoeff())
        throw Error(ErrorCode::EmptyPlacement, "cell pitch exceeds the model size");
    const TriMesh grid = remesh_isotropic(shell.m_prime, pitch);
    const double margin = polygon_circumradius(spec.shape, spec.cross_section) + profile.extrusion_width();
    std::vector<std::pair<Vec3, Vec3>> rim;
    if (shell.single_sided)
        for (const DirectedEdge &e : boundary_edges(grid))
            rim.emplace_back(grid.vertex(e.from), grid.vertex(e.to));

    std::vector<Placement> out;
    for (std::size_t i = 0; i < grid.vertex_count(); ++i) {
        const Vec3 &p = grid.vertices()[i];
        bool keep = true;
        for (const auto &[a, b] : rim)
            if (point_segment_distance(p, a, b) < margin) {
                keep = false;
                break;
            }
        if (keep)
            out.push_back({p, grid.vertex_normals()[i]});
    }
    if (out.empty())
        throw Error(ErrorCode::EmptyPlacement, "no cell fits on the display surface");
    return out;
}

Cell loft_cell(int id, const Placement &at, const CellSpec &spec, const ShellIndex &index, double cross_section)
{
    const double size = cross_section > 0.0 ? cross_section : spec.cross_section;
    const Vec3 n = at.normal.normalized();
    const Vec3 c = at.center;
    const Vec3 u = reference_tangent(n), v = n.cross(u);
    const double reach = kMaxDepthFactor * spec.cell_depth;

    const auto depth_hit = index.inner().first_hit(c, -n, 1e-9);
    if (!depth_hit || depth_hit->t > reach)
        throw Error(ErrorCode::ProjectionMiss, "cell " + std::to_string(id) + ": normal ray misses the inner surface");
    const double t_in = depth_hit->t;

    const std::vector<Vec2> poly = cross_section_polygon(spec.shape, size);
    std::vector<Vec3> ring;
    for (const Vec2 &q : poly)
        ring.push_back(c + q.x() * u + q.y() * v);

    // Normal curvature of M' along the corner directions.
    double kappa_sum = 0.0;
    int kappa_count = 0;
    double sink = 0.0;
    for (const Vec3 &p : ring) {
        const auto hit = nearest_hit(index.outer(), p, n, reach);
        if (!hit)
            continue;
        const Vec3 q = p + hit->t * n;
        const Vec3 d = q - c;
        if (d.squaredNorm() < 1e-12)
            continue;
        kappa_sum += (surface_normal(index.outer(), *hit) - n).dot(d) / d.squaredNorm();
        ++kappa_count;
        sink = std::max(sink, -hit->t);
    }
    const double kappa = kappa_count > 0 ? kappa_sum / kappa_count : 0.0;
    double ratio = std::clamp(1.0 - kappa * t_in, 0.3, 2.0);
    if (std::abs(ratio - 1.0) < kParallelBand)
        ratio = 1.0;

    // Keep the inner face above the inner surface under every corner.
    double t_floor = t_in;
    for (const Vec3 &p : ring) {
        const Vec3 lifted = c + ratio * (p - c);
        if (const auto hit = index.inner().first_hit(lifted, -n, 1e-9); hit && hit->t <= reach)
            t_floor = std::min(t_floor, hit->t);
    }

    Cell cell;
    cell.id = id;
    cell.center = c;
    cell.normal = n;
    cell.cross_section = size;
    cell.perspective_ratio = ratio;
    for (const Vec3 &p : ring) {
        cell.outer.push_back(p - sink * n);
        cell.inner.push_back(c - t_floor * n + ratio * (p - c));
    }
    cell.solid = loft(cell.outer, cell.inner);
    cell.volume = cell.solid.signed_volume();
    return cell;
}

std::vector<Cell> loft_cells(const std::vector<Placement> &placements, const CellSpec &spec, const ShellIndex &index,
                             Execution exec)
{
    std::vector<Cell> cells(placements.size());
    for_each_index(exec, placements.size(), [&](std::size_t i) {
        const int id = static_cast<int>(i);
        try {
            cells[i] = loft_cell(id, placements[i], spec, index);
        } catch (const Error &e) {
            if (e.code() != ErrorCode::ProjectionMiss)
                throw;
            cells[i].id = id;
            cells[i].center = placements[i].center;
            cells[i].normal = placements[i].normal;
            cells[i].cross_section = spec.cross_section;
            cells[i].status = CellStatus::ProjectionMiss;
        }
    });
    return cells;
}

std::vector<std::pair<int, int>> conflicting_pairs(const std::vector<Cell> &cells, double wall, Execution exec)
{
    // Uniform grid over inflated bounding boxes.
    std::vector<Aabb> boxes(cells.size());
    double cell_size = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].active())
            continue;
        boxes[i] = cell_box(cells[i]).inflated(0.5 * wall);
        cell_size = std::max(cell_size, boxes[i].extent().maxCoeff());
    }
    if (cell_size <= 0.0)
        return {};
    using Key = std::array<long long, 3>;
    std::map<Key, std::vector<int>> grid;
    const auto key = [&](const Vec3 &p) {
        return Key{static_cast<long long>(std::floor(p.x() / cell_size)),
                   static_cast<long long>(std::floor(p.y() / cell_size)),
                   static_cast<long long>(std::floor(p.z() / cell_size))};
    };
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].active())
            continue;
        const Key lo = key(boxes[i].lo), hi = key(boxes[i].hi);
        for (long long x = lo[0]; x <= hi[0]; ++x)
            for (long long y = lo[1]; y <= hi[1]; ++y)
                for (long long z = lo[2]; z <= hi[2]; ++z)
                    grid[{x, y, z}].push_back(static_cast<int>(i));
    }
    std::set<std::pair<int, int>> candidates;
    for (const auto &[k, ids] : grid)
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (std::size_t b = a + 1; b < ids.size(); ++b)
                if (boxes[ids[a]].overlaps(boxes[ids[b]]))
                    candidates.emplace(std::min(ids[a], ids[b]), std::max(ids[a], ids[b]));

    const std::vector<std::pair<int, int>> list(candidates.begin(), candidates.end());
    std::vector<char> close(list.size(), 0);
    for_each_index(exec, list.size(), [&](std::size_t k) {
        const auto [i, j] = list[k];
        close[k] = convex_distance(cells[i].solid.vertices(), cells[j].solid.vertices()) < wall - 1e-9;
    });
    std::vector<std::pair<int, int>> out;
    for (std::size_t k = 0; k < list.size(); ++k)
        if (close[k])
            out.push_back(list[k]);
    return out;
}

OverlapSummary resolve_overlaps(std::vector<Cell> &cells, const CellSpec &spec, const ShellIndex &index,
                                const PrinterProfile &profile, Execution exec)
{
    const double wall = profile.extrusion_width();
    const double floor_size = kLimits.min_inscribed / inscribed_ratio(spec.shape);
    OverlapSummary summary;
    auto pairs = conflicting_pairs(cells, wall, exec);
    summary.initial_pairs = pairs.size();
    {
        std::set<int> involved;
        for (const auto &[i, j] : pairs)
            if (convex_distance(cells[i].solid.vertices(), cells[j].solid.vertices()) == 0.0) {
                ++summary.initial_intersecting;
                involved.insert(i);
                involved.insert(j);
            }
        summary.cells_intersecting = involved.size();
    }

    while (!pairs.empty() && summary.rounds < kMaxShrinkRounds) {
        std::set<int> involved;
        for (const auto &[i, j] : pairs) {
            involved.insert(i);
            involved.insert(j);
        }
        // The last step stops exactly at the inscribed-diameter floor; cells
        // already there stay as they are.
        std::vector<int> ids;
        for (int id : involved)
            if (cells[static_cast<std::size_t>(id)].cross_section > floor_size + 1e-9)
                ids.push_back(id);
        if (ids.empty())
            break;
        ++summary.rounds;
        for_each_index(exec, ids.size(), [&](std::size_t k) {
            Cell &cell = cells[static_cast<std::size_t>(ids[k])];
            Cell shrunk = loft_cell(cell.id, {cell.center, cell.normal}, spec, index,
                                    std::max(cell.cross_section * kShrinkFactor, floor_size));
            shrunk.status = CellStatus::Shrunk;
            cell = std::move(shrunk);
        });
        pairs = conflicting_pairs(cells, wall, exec);
    }
    // Whatever still conflicts loses its most-shrunk (then higher-id) member.
    for (const auto &[i, j] : pairs) {
        Cell &a = cells[static_cast<std::size_t>(i)], &b = cells[static_cast<std::size_t>(j)];
        if (!a.active() || !b.active())
            continue;
        Cell &drop = a.cross_section < b.cross_section ? a : b;
        drop.status = CellStatus::Overlapping;
    }
    return summary;
}

CellReport tally(const std::vector<Cell> &cells)
{
    CellReport r;
    for (const Cell &c : cells) {
        switch (c.status) {
        case CellStatus::Ok: ++r.ok; break;
        case CellStatus::Shrunk: ++r.shrunk; break;
        case CellStatus::Overlapping: ++r.overlapping; break;
        case CellStatus::BooleanFailed: ++r.boolean_failed; break;
        case CellStatus::ProjectionMiss: ++r.projection_miss; break;
        }
    }
    return r;
}

DisplayModel assemble(ShellModel shell, std::vector<Cell> cells, Execution exec)
{
    DisplayModel model;
    TriMesh base = shell_union(shell);
    if (!base.is_closed())
        throw Error(ErrorCode::BooleanFailure, "shell layers do not form a closed solid");

    // Classify each active cell against the shell solid.
    enum Placement : char { Inside, Crossing, Degenerate };
    std::vector<char> where(cells.size(), Inside);
    {
        const Bvh bvh(base);
        for_each_index(exec, cells.size(), [&](std::size_t i) {
            const Cell &cell = cells[i];
            if (!cell.active())
                return;
            if (!cell.solid.is_closed() || cell.volume < 1e-6) {
                where[i] = Degenerate;
                return;
            }
            const Aabb box = cell.solid.bounds();
            for (const Vec3 &p : cell.solid.vertices())
                if (bvh.closest(p).distance < 1e-4) {
                    where[i] = Crossing;
                    return;
                }
            if (!bvh.contains(cell.solid.vertex(0))) {
                where[i] = Crossing;
                return;
            }
            for (int f : bvh.faces_overlapping(box)) {
                const auto t = base.triangle(static_cast<std::size_t>(f));
                for (const Vec3 &p : t)
                    if (inside_convex(cell.solid, p, 0.0)) {
                        where[i] = Crossing;
                        return;
                    }
                for (std::size_t g = 0; g < cell.solid.face_count(); ++g) {
                    const auto s = cell.solid.triangle(g);
                    if (triangles_intersect(t[0], t[1], t[2], s[0], s[1], s[2])) {
                        where[i] = Crossing;
                        return;
                    }
                }
            }
        });
    }

    std::vector<TriMesh> parts{base};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].active())
            continue;
        if (where[i] == Degenerate)
            cells[i].status = CellStatus::BooleanFailed;
        else if (where[i] == Inside)
            parts.push_back(cells[i].solid.flipped());
    }
    TriMesh printable = concatenate(parts);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!cells[i].active() || where[i] != Crossing)
            continue;
        try {
            TriMesh next = boolean(printable, cells[i].solid, BooleanOp::Difference);
            if (!next.is_closed())
                throw Error(ErrorCode::BooleanFailure, "difference is not closed");
            printable = std::move(next);
        } catch (const Error &e) {
            if (e.code() != ErrorCode::BooleanFailure)
                throw;
            cells[i].status = CellStatus::BooleanFailed;
            model.warnings.push_back("cell " + std::to_string(cells[i].id) + " left blank: " + e.what());
        }
    }
    if (!printable.is_closed())
        throw Error(ErrorCode::BooleanFailure, "printable solid is not closed");

    model.shell = std::move(shell);
    model.cells = std::move(cells);
    model.printable = std::move(printable);
    model.report = tally(model.cells);
    return model;
}

DisplayModel generate_display(const TriMesh &mesh, const CellSpec &spec, const PrinterProfile &profile,
                              ShellMode mode, bool preview_only, Execution exec)
{
    ShellModel shell = build_shell(mesh, spec, profile, mode);
    std::vector<Cell> cells;
    OverlapSummary overlaps;
    {
        const ShellIndex index(shell);
        cells = loft_cells(place_cells(shell, spec, profile), spec, index, exec);
        overlaps = resolve_overlaps(cells, spec, index, profile, exec);
    }
    DisplayModel model;
    if (preview_only) {
        model.shell = std::move(shell);
        model.cells = std::move(cells);
        model.report = tally(model.cells);
    } else {
        model = assemble(std::move(shell), std::move(cells), exec);
    }
    model.overlaps = overlaps;
    model.warnings.insert(model.warnings.begin(), model.shell.warnings.begin(), model.shell.warnings.end());
    return model;
}

Json cells_json(const std::vector<Cell> &cells)
{
    Json out = Json::array();
    for (const Cell &c : cells)
        out.push_back({{"id", c.id},
                       {"center", {c.center.x(), c.center.y(), c.center.z()}},
                       {"normal", {c.normal.x(), c.normal.y(), c.normal.z()}},
                       {"status", to_string(c.status)},
                       {"volume_mm3", c.volume}});
    return out;
}

Json to_json(const CellReport &r)
{
    return {{"ok", r.ok},
            {"shrunk", r.shrunk},
            {"overlapping", r.overlapping},
            {"boolean_failed", r.boolean_failed},
            {"projection_miss", r.projection_miss},
            {"total", r.total()}};
}

} // namespace magneto
