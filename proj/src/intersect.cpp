#include "magneto/intersect.hpp"

#include <cmath>
#include <vector>

namespace magneto {

namespace {

struct Interval {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool empty() const { return lo > hi; }
    void add(double t)
    {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
};

// Part of the polygon lying on the other plane, projected on the line direction.
Interval crossing_interval(std::span<const Vec3> poly, const std::vector<double> &dist, const Vec3 &dir, double eps)
{
    Interval iv;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double di = dist[i];
        if (std::abs(di) <= eps)
            iv.add(poly[i].dot(dir));
        const std::size_t j = (i + 1) % n;
        const double dj = dist[j];
        if ((di > eps && dj < -eps) || (di < -eps && dj > eps)) {
            const Vec3 x = poly[i] + (poly[j] - poly[i]) * (di / (di - dj));
            iv.add(x.dot(dir));
        }
    }
    return iv;
}

bool separated_2d(const std::vector<Vec2> &p, const std::vector<Vec2> &q, double eps)
{
    auto test = [&](const std::vector<Vec2> &poly) {
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 e = poly[(i + 1) % n] - poly[i];
            const double len = e.norm();
            if (len <= eps)
                continue;
            const Vec2 axis(-e.y() / len, e.x() / len);
            double pmin = 1e300, pmax = -1e300, qmin = 1e300, qmax = -1e300;
            for (const Vec2 &v : p) {
                pmin = std::min(pmin, v.dot(axis));
                pmax = std::max(pmax, v.dot(axis));
            }
            for (const Vec2 &v : q) {
                qmin = std::min(qmin, v.dot(axis));
                qmax = std::max(qmax, v.dot(axis));
            }
            if (std::min(pmax, qmax) - std::max(pmin, qmin) <= eps)
                return true;
        }
        return false;
    };
    return test(p) || test(q);
}

} // namespace

Vec3 polygon_normal(std::span<const Vec3> poly)
{
    Vec3 n = Vec3::Zero();
    for (std::size_t i = 0; i < poly.size(); ++i)
        n += poly[i].cross(poly[(i + 1) % poly.size()]);
    const double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

Contact classify_contact(std::span<const Vec3> p, std::span<const Vec3> q, double eps)
{
    const Vec3 np = polygon_normal(p);
    const Vec3 nq = polygon_normal(q);
    if (np.isZero() || nq.isZero())
        return Contact::None;

    std::vector<double> dq(q.size()), dp(p.size());
    bool q_pos = false, q_neg = false;
    for (std::size_t i = 0; i < q.size(); ++i) {
        dq[i] = np.dot(q[i] - p[0]);
        q_pos |= dq[i] > eps;
        q_neg |= dq[i] < -eps;
    }
    if (!(q_pos && q_neg)) {
        // q on one side of p's plane: only coplanar overlap or touching remains.
        const bool coplanar = !q_pos && !q_neg;
        if (!coplanar) {
            bool touches = false;
            for (double d : dq)
                touches |= std::abs(d) <= eps;
            if (!touches)
                return Contact::None;
        } else {
            const Vec3 u = (std::abs(np.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(np).normalized();
            const Vec3 v = np.cross(u);
            std::vector<Vec2> p2, q2;
            for (const Vec3 &x : p)
                p2.emplace_back(x.dot(u), x.dot(v));
            for (const Vec3 &x : q)
                q2.emplace_back(x.dot(u), x.dot(v));
            return separated_2d(p2, q2, eps) ? Contact::None : Contact::Coplanar;
        }
    }
    bool p_pos = false, p_neg = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        dp[i] = nq.dot(p[i] - q[0]);
        p_pos |= dp[i] > eps;
        p_neg |= dp[i] < -eps;
    }
    // Touching only (a vertex or edge resting on the other plane) is not a crossing
    // unless the other polygon straddles this one's plane.
    if (!(p_pos && p_neg) && !(q_pos && q_neg))
        return Contact::None;
    if (!p_pos && !p_neg)
        return Contact::None; // p lies in q's plane but q is not coplanar with p: degenerate

    const Vec3 dir = np.cross(nq);
    if (dir.norm() < 1e-12)
        return Contact::None;
    const Vec3 d = dir.normalized();
    const Interval ip = crossing_interval(p, dp, d, eps);
    const Interval iq = crossing_interval(q, dq, d, eps);
    if (ip.empty() || iq.empty())
        return Contact::None;
    const double overlap = std::min(ip.hi, iq.hi) - std::max(ip.lo, iq.lo);
    return overlap > eps ? Contact::Crossing : Contact::None;
}

} // namespace magneto
