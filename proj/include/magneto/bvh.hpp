#pragma once

#include "magneto/tri_mesh.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace magneto {

struct ClosestPoint {
    Vec3 point;
    int face;
    double distance;
};

struct LineHit {
    double t;
    int face;
    double u;
    double v;
};

// Axis-aligned bounding-volume hierarchy over the faces of a mesh. Keeps a
// reference to the mesh, which must outlive it.
class Bvh {
public:
    explicit Bvh(const TriMesh &mesh);

    const TriMesh &mesh() const { return *mesh_; }

    ClosestPoint closest(const Vec3 &p) const;

    // Faces whose triangle lies within `radius` of p.
    std::vector<int> faces_near(const Vec3 &p, double radius) const;

    // Faces whose bounding box overlaps `box`.
    std::vector<int> faces_overlapping(const Aabb &box) const;

    // All intersections of the infinite line origin + t*dir, sorted by t.
    std::vector<LineHit> line_hits(const Vec3 &origin, const Vec3 &dir) const;

    // Nearest hit with t > t_min along the ray.
    std::optional<LineHit> first_hit(const Vec3 &origin, const Vec3 &dir, double t_min = 0.0) const;

    // Point-in-solid test for a closed mesh by ray-crossing parity, retried
    // along other directions when a ray grazes an edge or vertex.
    bool contains(const Vec3 &p) const;

    // Interpolated vertex normal at a hit.
    Vec3 normal_at(const LineHit &hit) const;

private:
    struct Node {
        Aabb box;
        int left = -1;  // child index, or -1 for leaf
        int right = -1;
        int begin = 0;  // range into order_ for leaves
        int end = 0;
    };

    int build(int begin, int end);
    bool ray_box(const Aabb &box, const Vec3 &origin, const Vec3 &inv_dir) const;

    const TriMesh *mesh_;
    std::vector<Node> nodes_;
    std::vector<int> order_;
    std::vector<Aabb> face_boxes_;
    std::vector<Vec3> centroids_;
};

// Brute-force crossing-parity containment (no acceleration structure). For
// one-off queries against meshes that change between calls.
bool contains_brute_force(const TriMesh &mesh, const Vec3 &p);

} // namespace magneto
