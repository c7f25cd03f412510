#include "magneto/primitives.hpp"

#include "magneto/error.hpp"

#include <cmath>
#include <numbers>

namespace magneto::primitives {

namespace {

void add_grid(std::vector<Vec3> &verts, std::vector<Face> &faces, const Vec3 &origin, const Vec3 &u, const Vec3 &v,
              int nu, int nv)
{
    const int base = static_cast<int>(verts.size());
    for (int j = 0; j <= nv; ++j)
        for (int i = 0; i <= nu; ++i)
            verts.push_back(origin + u * (static_cast<double>(i) / nu) + v * (static_cast<double>(j) / nv));
    auto id = [&](int i, int j) { return base + j * (nu + 1) + i; };
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
}

TriMesh oriented(TriMesh m) { return m.signed_volume() < 0.0 ? m.flipped() : m; }

} // namespace

TriMesh box(const Vec3 &lo, const Vec3 &hi, int divisions)
{
    if (divisions < 1 || (hi.array() <= lo.array()).any())
        throw Error(ErrorCode::InvalidArgument, "box needs hi > lo and divisions >= 1");
    const Vec3 d = hi - lo;
    const Vec3 X(d.x(), 0, 0), Y(0, d.y(), 0), Z(0, 0, d.z());
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    const int n = divisions;
    add_grid(verts, faces, lo, Y, X, n, n);
    add_grid(verts, faces, Vec3(lo.x(), lo.y(), hi.z()), X, Y, n, n);
    add_grid(verts, faces, lo, X, Z, n, n);
    add_grid(verts, faces, Vec3(lo.x(), hi.y(), lo.z()), Z, X, n, n);
    add_grid(verts, faces, lo, Z, Y, n, n);
    add_grid(verts, faces, Vec3(hi.x(), lo.y(), lo.z()), Y, Z, n, n);
    return weld(verts, faces, 1e-9 * d.norm());
}

TriMesh icosphere(const Vec3 &center, double radius, int frequency)
{
    if (frequency < 1 || radius <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "icosphere needs radius > 0 and frequency >= 1");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    const std::vector<Vec3> ico = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    const std::vector<Face> ico_faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
        {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    const int n = frequency;
    for (Face f : ico_faces) {
        Vec3 A = ico[f[0]], B = ico[f[1]], C = ico[f[2]];
        if ((B - A).cross(C - A).dot(A + B + C) < 0.0)
            std::swap(B, C);
        const int base = static_cast<int>(verts.size());
        std::vector<std::vector<int>> id(n + 1);
        for (int i = 0; i <= n; ++i)
            for (int j = 0; i + j <= n; ++j) {
                const Vec3 p = A + (B - A) * (double(i) / n) + (C - A) * (double(j) / n);
                id[i].push_back(static_cast<int>(verts.size()));
                verts.push_back(center + radius * p.normalized());
            }
        (void)base;
        for (int i = 0; i < n; ++i)
            for (int j = 0; i + j < n; ++j) {
                faces.push_back({id[i][j], id[i + 1][j], id[i][j + 1]});
                if (i + j + 1 < n)
                    faces.push_back({id[i + 1][j], id[i + 1][j + 1], id[i][j + 1]});
            }
    }
    return weld(verts, faces, 1e-9 * radius);
}

TriMesh frustum(double bottom_radius, double top_radius, double height, int segments, double base_z)
{
    if (segments < 3 || bottom_radius <= 0.0 || top_radius < 0.0 || height <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "invalid frustum parameters");
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    const int bc = 0;
    verts.emplace_back(0, 0, base_z);
    const int tc = 1;
    verts.emplace_back(0, 0, base_z + height);
    const int b0 = static_cast<int>(verts.size());
    for (int i = 0; i < segments; ++i) {
        const double a = 2.0 * std::numbers::pi * i / segments;
        verts.emplace_back(bottom_radius * std::cos(a), bottom_radius * std::sin(a), base_z);
    }
    const bool apex = top_radius == 0.0;
    const int t0 = static_cast<int>(verts.size());
    if (!apex)
        for (int i = 0; i < segments; ++i) {
            const double a = 2.0 * std::numbers::pi * i / segments;
            verts.emplace_back(top_radius * std::cos(a), top_radius * std::sin(a), base_z + height);
        }
    for (int i = 0; i < segments; ++i) {
        const int j = (i + 1) % segments;
        faces.push_back({bc, b0 + j, b0 + i});
        if (apex) {
            faces.push_back({b0 + i, b0 + j, tc});
        } else {
            faces.push_back({b0 + i, b0 + j, t0 + j});
            faces.push_back({b0 + i, t0 + j, t0 + i});
            faces.push_back({tc, t0 + i, t0 + j});
        }
    }
    return TriMesh(std::move(verts), std::move(faces));
}

TriMesh torus(double major_radius, double minor_radius, int major_segments, int minor_segments)
{
    if (minor_radius <= 0.0 || major_radius <= minor_radius || major_segments < 3 || minor_segments < 3)
        throw Error(ErrorCode::InvalidArgument, "invalid torus parameters");
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    for (int i = 0; i < major_segments; ++i) {
        const double u = 2.0 * std::numbers::pi * i / major_segments;
        for (int j = 0; j < minor_segments; ++j) {
            const double v = 2.0 * std::numbers::pi * j / minor_segments;
            const double r = major_radius + minor_radius * std::cos(v);
            verts.emplace_back(r * std::cos(u), r * std::sin(u), minor_radius * std::sin(v));
        }
    }
    auto id = [&](int i, int j) { return (i % major_segments) * minor_segments + (j % minor_segments); };
    for (int i = 0; i < major_segments; ++i)
        for (int j = 0; j < minor_segments; ++j) {
            faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return oriented(TriMesh(std::move(verts), std::move(faces)));
}

TriMesh sheet(double width, double depth, int nx, int ny, const Vec2 &origin)
{
    if (nx < 1 || ny < 1 || width <= 0.0 || depth <= 0.0)
        throw Error(ErrorCode::InvalidArgument, "invalid sheet parameters");
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    add_grid(verts, faces, Vec3(origin.x(), origin.y(), 0.0), Vec3(width, 0, 0), Vec3(0, depth, 0), nx, ny);
    return TriMesh(std::move(verts), std::move(faces));
}

} // namespace magneto::primitives
