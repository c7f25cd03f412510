#pragma once

#include "magneto/geometry.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace magneto {

using Face = std::array<int, 3>;

// Faces with area below this (mm^2) count as degenerate.
inline constexpr double kDegenerateArea = 1e-9;

// Indexed triangle mesh in millimetres. Immutable once built; topology flags
// and area-weighted vertex normals are computed at construction.
class TriMesh {
public:
    TriMesh() = default;
    TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

    const std::vector<Vec3> &vertices() const { return vertices_; }
    const std::vector<Face> &faces() const { return faces_; }
    const std::vector<Vec3> &vertex_normals() const { return normals_; }
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t face_count() const { return faces_.size(); }
    bool empty() const { return faces_.empty(); }

    const Vec3 &vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    std::array<Vec3, 3> triangle(std::size_t f) const;
    Vec3 face_normal(std::size_t f) const;
    double face_area(std::size_t f) const;

    // Every edge shared by exactly two faces with opposite directions and no
    // degenerate faces.
    bool is_watertight() const { return watertight_; }
    // Watertight with strictly positive enclosed volume (outward winding).
    bool is_closed() const { return watertight_ && signed_volume_ > 0.0; }
    std::size_t boundary_edge_count() const { return boundary_edges_; }
    std::size_t non_manifold_edge_count() const { return non_manifold_edges_; }
    std::size_t degenerate_face_count() const { return degenerate_faces_; }
    std::size_t edge_count() const { return edge_count_; }
    // V - E + F over referenced vertices.
    long euler_characteristic() const;

    double signed_volume() const { return signed_volume_; }
    double surface_area() const;
    const Aabb &bounds() const { return bounds_; }

    TriMesh flipped() const;
    TriMesh translated(const Vec3 &offset) const;
    TriMesh transformed(const Eigen::Isometry3d &xf) const;

private:
    void analyse();

    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::vector<Vec3> normals_;
    Aabb bounds_;
    double signed_volume_ = 0.0;
    bool watertight_ = false;
    std::size_t boundary_edges_ = 0;
    std::size_t non_manifold_edges_ = 0;
    std::size_t degenerate_faces_ = 0;
    std::size_t edge_count_ = 0;
};

// Disjoint union of meshes (indices rebased, nothing merged).
TriMesh concatenate(std::span<const TriMesh> meshes);

// Merges vertices closer than `tolerance`, drops faces that collapse onto a
// repeated index and vertices no face references.
TriMesh weld(const std::vector<Vec3> &vertices, const std::vector<Face> &faces, double tolerance);

// Removes pairs of faces spanning the same three vertices with opposite
// winding (zero-thickness fins left where two solids share a surface).
TriMesh cancel_opposite_faces(const TriMesh &mesh);

// Union of solids that only touch along shared, identically tessellated
// surfaces: concatenation, weld, then cancellation of the shared faces.
TriMesh union_touching(std::span<const TriMesh> solids, double weld_tolerance = 1e-6);

struct DirectedEdge {
    int from;
    int to;
};

// Directed boundary edges (edges used by exactly one face), in face order.
std::vector<DirectedEdge> boundary_edges(const TriMesh &mesh);

// Per-vertex one-ring neighbour lists (sorted, unique).
std::vector<std::vector<int>> vertex_neighbors(const TriMesh &mesh);

// Per-vertex boundary flag.
std::vector<char> boundary_vertices(const TriMesh &mesh);

} // namespace magneto
