#include "magneto/convex.hpp"

#include <array>
#include <cmath>

namespace magneto {

namespace {

struct Simplex {
    std::array<Vec3, 4> p;
    int n = 0;
};

Vec3 support(std::span<const Vec3> pts, const Vec3 &dir)
{
    std::size_t best = 0;
    double best_dot = pts[0].dot(dir);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double d = pts[i].dot(dir);
        if (d > best_dot) {
            best_dot = d;
            best = i;
        }
    }
    return pts[best];
}

// Closest point of a segment to the origin; drops the vertex not needed.
Vec3 reduce_segment(Simplex &s)
{
    const Vec3 a = s.p[0], b = s.p[1];
    const Vec3 ab = b - a;
    const double t = -a.dot(ab) / std::max(ab.squaredNorm(), 1e-300);
    if (t <= 0.0) {
        s.n = 1;
        return a;
    }
    if (t >= 1.0) {
        s.p[0] = b;
        s.n = 1;
        return b;
    }
    return a + t * ab;
}

// Closest point of a triangle to the origin (Voronoi regions), keeping only
// the vertices that support it.
Vec3 reduce_triangle(Simplex &s)
{
    const Vec3 a = s.p[0], b = s.p[1], c = s.p[2];
    const Vec3 ab = b - a, ac = c - a, ap = -a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) {
        s.n = 1;
        return a;
    }
    const Vec3 bp = -b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) {
        s.p[0] = b;
        s.n = 1;
        return b;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        s.p = {a, b};
        s.n = 2;
        return a + d1 / (d1 - d3) * ab;
    }
    const Vec3 cp = -c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) {
        s.p[0] = c;
        s.n = 1;
        return c;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        s.p = {a, c};
        s.n = 2;
        return a + d2 / (d2 - d6) * ac;
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        s.p = {b, c};
        s.n = 2;
        return b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b);
    }
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

// Returns false when the origin lies inside the tetrahedron.
bool reduce_tetrahedron(Simplex &s, Vec3 &closest)
{
    static constexpr int faces[4][4] = {{0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}, {1, 3, 2, 0}};
    bool outside_any = false;
    double best = std::numeric_limits<double>::infinity();
    Simplex best_s;
    for (const auto &f : faces) {
        const Vec3 &a = s.p[f[0]], &b = s.p[f[1]], &c = s.p[f[2]], &d = s.p[f[3]];
        const Vec3 n = (b - a).cross(c - a);
        const double side_origin = n.dot(-a), side_d = n.dot(d - a);
        if (side_origin * side_d >= 0.0)
            continue;  // origin on the same side as the fourth vertex
        outside_any = true;
        Simplex t;
        t.p = {a, b, c};
        t.n = 3;
        const Vec3 q = reduce_triangle(t);
        if (q.squaredNorm() < best) {
            best = q.squaredNorm();
            best_s = t;
            closest = q;
        }
    }
    if (!outside_any)
        return false;
    s = best_s;
    return true;
}

} // namespace

double convex_distance(std::span<const Vec3> a, std::span<const Vec3> b)
{
    if (a.empty() || b.empty())
        return std::numeric_limits<double>::infinity();
    Simplex s;
    Vec3 v = a[0] - b[0];
    s.p[0] = v;
    s.n = 1;
    double scale = 0.0;
    for (const Vec3 &p : a)
        scale = std::max(scale, p.cwiseAbs().maxCoeff());
    for (const Vec3 &p : b)
        scale = std::max(scale, p.cwiseAbs().maxCoeff());
    const double tiny = 1e-12 * std::max(1.0, scale);
    for (int iter = 0; iter < 128; ++iter) {
        const double vv = v.squaredNorm();
        if (std::sqrt(vv) <= tiny)
            return 0.0;
        const Vec3 w = support(a, -v) - support(b, v);
        if (vv - v.dot(w) <= 1e-12 * vv)
            return std::sqrt(vv);
        for (int i = 0; i < s.n; ++i)
            if ((s.p[i] - w).squaredNorm() <= tiny * tiny)
                return std::sqrt(vv);
        s.p[s.n++] = w;
        switch (s.n) {
        case 2:
            v = reduce_segment(s);
            break;
        case 3:
            v = reduce_triangle(s);
            break;
        default:
            if (!reduce_tetrahedron(s, v))
                return 0.0;
            break;
        }
    }
    return v.norm();
}

} // namespace magneto
