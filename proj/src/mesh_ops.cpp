#include "magneto/mesh_ops.hpp"

#include "magneto/bvh.hpp"
#include "magneto/error.hpp"
#include "magneto/intersect.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <unordered_map>

namespace magneto {

namespace {

// Displacement that puts a vertex at `distance` from every incident face
// plane in the least-squares sense (angle weighted). Flat neighbourhoods fall
// back to the plain normal through the pseudo-inverse; sharp edges and
// corners keep their planes parallel.
std::vector<Vec3> plane_fit_displacements(const TriMesh &mesh, double distance)
{
    std::vector<Eigen::Matrix3d> normal_matrix(mesh.vertex_count(), Eigen::Matrix3d::Zero());
    std::vector<Vec3> rhs(mesh.vertex_count(), Vec3::Zero());
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        if (mesh.face_area(f) < kDegenerateArea)
            continue;
        const Face &face = mesh.faces()[f];
        const Vec3 n = mesh.face_normal(f);
        const auto tri = mesh.triangle(f);
        for (int k = 0; k < 3; ++k) {
            const Vec3 e1 = (tri[(k + 1) % 3] - tri[k]).normalized();
            const Vec3 e2 = (tri[(k + 2) % 3] - tri[k]).normalized();
            const double angle = std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
            normal_matrix[face[k]] += angle * n * n.transpose();
            rhs[face[k]] += angle * distance * n;
        }
    }
    const auto &normals = mesh.vertex_normals();
    std::vector<Vec3> out(mesh.vertex_count());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(out.size()); ++i) {
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(normal_matrix[i]);
        const double top = eig.eigenvalues().maxCoeff();
        if (top <= 0.0) {
            out[i] = distance * normals[i];
            continue;
        }
        Vec3 x = Vec3::Zero();
        for (int k = 0; k < 3; ++k) {
            const double lambda = eig.eigenvalues()[k];
            if (lambda > 0.05 * top) {
                const Vec3 v = eig.eigenvectors().col(k);
                x += v * (v.dot(rhs[i]) / lambda);
            }
        }
        // Needle-like neighbourhoods could push a vertex arbitrarily far.
        const double limit = 3.0 * std::abs(distance);
        if (x.norm() > limit)
            x *= limit / x.norm();
        out[i] = x;
    }
    return out;
}

} // namespace

TriMesh offset_mesh(const TriMesh &mesh, double distance, Warnings *warnings)
{
    if (distance == 0.0)
        return mesh;
    std::vector<Vec3> verts = mesh.vertices();
    const std::vector<Vec3> shift = plane_fit_displacements(mesh, distance);
    for (std::size_t i = 0; i < verts.size(); ++i)
        verts[i] += shift[i];
    TriMesh out(std::move(verts), mesh.faces());

    std::size_t inverted = 0;
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const auto [a, b, c] = mesh.triangle(f);
        const auto [p, q, r] = out.triangle(f);
        if ((b - a).cross(c - a).dot((q - p).cross(r - p)) <= 0.0)
            ++inverted;
    }
    // A whole-body point reflection keeps every face normal but turns the
    // solid inside out.
    if (distance < 0.0 && mesh.signed_volume() > 0.0 && out.signed_volume() <= 0.0)
        inverted = std::max<std::size_t>(inverted, 1);
    if (inverted > 0) {
        std::ostringstream msg;
        msg << "offset by " << distance << " mm inverts " << inverted << " faces";
        if (distance < 0.0)
            throw Error(ErrorCode::OffsetCollapse, msg.str());
        if (warnings)
            warnings->push_back(msg.str());
    }
    if (warnings && count_self_intersections(out) > 0) {
        std::ostringstream msg;
        msg << "offset by " << distance << " mm self-intersects";
        warnings->push_back(msg.str());
    }
    return out;
}

std::size_t count_self_intersections(const TriMesh &mesh, std::size_t stop_after)
{
    const Bvh bvh(mesh);
    std::size_t found = 0;
    for (std::size_t f = 0; f < mesh.face_count() && found < stop_after; ++f) {
        const auto tf = mesh.triangle(f);
        const Face &ff = mesh.faces()[f];
        for (int g : bvh.faces_overlapping(triangle_box(tf[0], tf[1], tf[2]))) {
            if (static_cast<std::size_t>(g) <= f)
                continue;
            const Face &fg = mesh.faces()[g];
            bool shared = false;
            for (int i : ff)
                for (int j : fg)
                    shared |= i == j;
            if (shared)
                continue;
            const auto tg = mesh.triangle(static_cast<std::size_t>(g));
            if (triangles_intersect(tf[0], tf[1], tf[2], tg[0], tg[1], tg[2])) {
                ++found;
                break;
            }
        }
    }
    return found;
}

double signed_area(const Loop &loop)
{
    double a = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i)
        a += cross2(loop[i], loop[(i + 1) % loop.size()]);
    return 0.5 * a;
}

double PlanarSection::area() const
{
    double a = 0.0;
    for (const Loop &l : loops)
        a += signed_area(l);
    return a;
}

namespace {

bool point_in_loop(const Vec2 &p, const Loop &loop)
{
    bool inside = false;
    for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
        const Vec2 &a = loop[i], &b = loop[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (p.x() < x)
                inside = !inside;
        }
    }
    return inside;
}

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint32_t>(std::min(a, b));
    const auto hi = static_cast<std::uint32_t>(std::max(a, b));
    return (std::uint64_t{lo} << 32) | hi;
}

} // namespace

PlanarSection slice_at(const TriMesh &mesh, double z)
{
    double plane = z;
    for (int attempt = 0; attempt < 16; ++attempt) {
        const bool hits_vertex = std::any_of(mesh.vertices().begin(), mesh.vertices().end(),
                                             [&](const Vec3 &v) { return std::abs(v.z() - plane) < 1e-9; });
        if (!hits_vertex)
            break;
        plane += 1e-6;
    }

    struct Segment {
        std::uint64_t from;
        std::uint64_t to;
    };
    std::unordered_map<std::uint64_t, Vec2> points;
    std::vector<Segment> segments;
    const auto &V = mesh.vertices();
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const Face &t = mesh.faces()[f];
        std::uint64_t keys[2];
        int n = 0;
        for (int k = 0; k < 3 && n < 2; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            const double da = V[a].z() - plane, db = V[b].z() - plane;
            if ((da < 0.0) == (db < 0.0))
                continue;
            const std::uint64_t key = edge_key(a, b);
            if (!points.count(key)) {
                const Vec3 x = V[a] + (V[b] - V[a]) * (da / (da - db));
                points.emplace(key, Vec2(x.x(), x.y()));
            }
            keys[n++] = key;
        }
        if (n != 2)
            continue;
        const Vec3 normal = mesh.face_normal(f);
        const Vec2 dir(-normal.y(), normal.x()); // z x n
        const Vec2 seg = points[keys[1]] - points[keys[0]];
        if (seg.dot(dir) >= 0.0)
            segments.push_back({keys[0], keys[1]});
        else
            segments.push_back({keys[1], keys[0]});
    }
    if (segments.empty())
        throw Error(ErrorCode::EmptySection, "plane z=" + std::to_string(z) + " misses the solid");

    std::unordered_map<std::uint64_t, std::size_t> by_start;
    for (std::size_t i = 0; i < segments.size(); ++i)
        by_start.emplace(segments[i].from, i);
    std::vector<char> used(segments.size(), 0);
    PlanarSection section;
    section.z = plane;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s])
            continue;
        Loop loop;
        std::size_t cur = s;
        bool closed = false;
        while (!used[cur]) {
            used[cur] = 1;
            loop.push_back(points[segments[cur].from]);
            auto it = by_start.find(segments[cur].to);
            if (it == by_start.end())
                break;
            if (it->second == s) {
                closed = true;
                break;
            }
            cur = it->second;
        }
        if (closed && loop.size() >= 3)
            section.loops.push_back(std::move(loop));
    }
    if (section.loops.empty())
        throw Error(ErrorCode::EmptySection, "plane z=" + std::to_string(z) + " produced no closed loop");

    // Orientation from containment parity: even depth is outer (CCW), odd is a hole (CW).
    for (std::size_t i = 0; i < section.loops.size(); ++i) {
        int depth = 0;
        for (std::size_t j = 0; j < section.loops.size(); ++j)
            if (i != j && point_in_loop(section.loops[i][0], section.loops[j]))
                ++depth;
        const bool outer = depth % 2 == 0;
        if ((signed_area(section.loops[i]) > 0.0) != outer)
            std::reverse(section.loops[i].begin(), section.loops[i].end());
    }
    return section;
}

double volume(const TriMesh &mesh) { return mesh.signed_volume(); }

double partial_volume_below(const TriMesh &mesh, double z)
{
    const Aabb &box = mesh.bounds();
    if (z >= box.hi.z())
        return mesh.signed_volume();
    if (z <= box.lo.z())
        return 0.0;
    // Reference point on the cutting plane: the cap contributes nothing.
    const Vec3 origin(box.center().x(), box.center().y(), z);
    double six = 0.0;
    std::vector<Vec3> poly;
    poly.reserve(4);
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const auto tri = mesh.triangle(f);
        poly.clear();
        for (int k = 0; k < 3; ++k) {
            const Vec3 &a = tri[k], &b = tri[(k + 1) % 3];
            const double da = a.z() - z, db = b.z() - z;
            if (da <= 0.0)
                poly.push_back(a);
            if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0))
                poly.push_back(a + (b - a) * (da / (da - db)));
        }
        for (std::size_t k = 1; k + 1 < poly.size(); ++k)
            six += (poly[0] - origin).dot((poly[k] - origin).cross(poly[k + 1] - origin));
    }
    return six / 6.0;
}

} // namespace magneto
