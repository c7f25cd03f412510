#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <limits>
#include <optional>

namespace magneto {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Vec3 &p)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void extend(const Aabb &b)
    {
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    bool empty() const { return (lo.array() > hi.array()).any(); }
    Vec3 center() const { return 0.5 * (lo + hi); }
    Vec3 extent() const { return hi - lo; }
    Aabb inflated(double d) const { return {lo.array() - d, hi.array() + d}; }
    bool overlaps(const Aabb &b) const
    {
        return (lo.array() <= b.hi.array()).all() && (b.lo.array() <= hi.array()).all();
    }
    bool contains(const Vec3 &p) const
    {
        return (lo.array() <= p.array()).all() && (p.array() <= hi.array()).all();
    }
    Aabb intersection(const Aabb &b) const { return {lo.cwiseMax(b.lo), hi.cwiseMin(b.hi)}; }
    double squared_distance(const Vec3 &p) const
    {
        const Vec3 d = (lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - hi);
        return d.squaredNorm();
    }
};

inline Aabb triangle_box(const Vec3 &a, const Vec3 &b, const Vec3 &c)
{
    Aabb box;
    box.extend(a);
    box.extend(b);
    box.extend(c);
    return box;
}

inline double triangle_area(const Vec3 &a, const Vec3 &b, const Vec3 &c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
inline Vec3 closest_point_on_triangle(const Vec3 &p, const Vec3 &a, const Vec3 &b, const Vec3 &c)
{
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0)
        return a;
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3)
        return b;
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0)
        return a + ab * (d1 / (d1 - d3));
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6)
        return c;
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0)
        return a + ac * (d2 / (d2 - d6));
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return a + ab * v + ac * w;
}

inline double point_segment_distance(const Vec3 &p, const Vec3 &a, const Vec3 &b, double *param = nullptr)
{
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    if (param)
        *param = t;
    return (a + t * ab - p).norm();
}

struct RayHit {
    double t;
    double u; // barycentric weight of b
    double v; // barycentric weight of c
};

// Moller-Trumbore. Returns hits with any t (callers filter by sign).
inline std::optional<RayHit> intersect_line_triangle(const Vec3 &origin, const Vec3 &dir, const Vec3 &a,
                                                     const Vec3 &b, const Vec3 &c)
{
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 pvec = dir.cross(e2);
    const double det = e1.dot(pvec);
    if (std::abs(det) < 1e-14 * e1.norm() * e2.norm() * dir.norm())
        return std::nullopt;
    const double inv = 1.0 / det;
    const Vec3 tvec = origin - a;
    const double u = tvec.dot(pvec) * inv;
    if (u < 0.0 || u > 1.0)
        return std::nullopt;
    const Vec3 qvec = tvec.cross(e1);
    const double v = dir.dot(qvec) * inv;
    if (v < 0.0 || u + v > 1.0)
        return std::nullopt;
    return RayHit{e2.dot(qvec) * inv, u, v};
}

// Unit vector perpendicular to n, chosen as the projection of +X onto the
// plane (falling back to +Y when n is parallel to X).
inline Vec3 reference_tangent(const Vec3 &n)
{
    Vec3 t = Vec3::UnitX() - n * n.x();
    if (t.norm() < 1e-6)
        t = Vec3::UnitY() - n * n.y();
    return t.normalized();
}

// 2D cross product.
inline double cross2(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

} // namespace magneto
