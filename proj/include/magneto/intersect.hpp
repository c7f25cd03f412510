#pragma once

#include "magneto/geometry.hpp"

#include <span>

namespace magneto {

enum class Contact {
    None,     // disjoint or touching along a set of zero length
    Crossing, // interiors cross along a segment of positive length
    Coplanar, // coplanar with overlapping interiors
};

// Classifies how two planar convex polygons meet. `eps` is the distance
// below which a point counts as lying on a plane or a segment is considered
// degenerate.
Contact classify_contact(std::span<const Vec3> p, std::span<const Vec3> q, double eps);

inline bool triangles_intersect(const Vec3 &a0, const Vec3 &a1, const Vec3 &a2, const Vec3 &b0, const Vec3 &b1,
                                const Vec3 &b2, double eps = 1e-9)
{
    const Vec3 a[3] = {a0, a1, a2};
    const Vec3 b[3] = {b0, b1, b2};
    return classify_contact(a, b, eps) != Contact::None;
}

Vec3 polygon_normal(std::span<const Vec3> poly);

} // namespace magneto
