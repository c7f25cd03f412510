#pragma once

#include "magneto/geometry.hpp"

#include <span>

namespace magneto {

// Euclidean distance between the convex hulls of two point sets (GJK);
// 0 when the hulls overlap or touch.
double convex_distance(std::span<const Vec3> a, std::span<const Vec3> b);

} // namespace magneto
