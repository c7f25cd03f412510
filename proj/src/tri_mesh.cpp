#include "magneto/tri_mesh.hpp"

#include "magneto/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>

namespace magneto {

namespace {

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint32_t>(std::min(a, b));
    const auto hi = static_cast<std::uint32_t>(std::max(a, b));
    return (std::uint64_t{lo} << 32) | hi;
}

struct EdgeUse {
    std::uint64_t key;
    int face;
    bool forward; // from < to
};

std::vector<EdgeUse> edge_uses(const std::vector<Face> &faces)
{
    std::vector<EdgeUse> uses;
    uses.reserve(faces.size() * 3);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        for (int k = 0; k < 3; ++k) {
            const int a = faces[f][k], b = faces[f][(k + 1) % 3];
            uses.push_back({edge_key(a, b), static_cast<int>(f), a < b});
        }
    }
    std::sort(uses.begin(), uses.end(), [](const EdgeUse &x, const EdgeUse &y) {
        return x.key != y.key ? x.key < y.key : x.face < y.face;
    });
    return uses;
}

} // namespace

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces))
{
    const auto n = static_cast<long long>(vertices_.size());
    for (const Face &f : faces_)
        for (int i : f)
            if (i < 0 || i >= n)
                throw Error(ErrorCode::InvalidArgument, "face index " + std::to_string(i) + " out of range");
    analyse();
}

void TriMesh::analyse()
{
    normals_.assign(vertices_.size(), Vec3::Zero());
    bounds_ = Aabb{};
    for (const Vec3 &v : vertices_)
        bounds_.extend(v);

    const Vec3 origin = vertices_.empty() ? Vec3::Zero() : bounds_.center();
    double six_volume = 0.0;
    degenerate_faces_ = 0;
    for (const Face &f : faces_) {
        const Vec3 &a = vertices_[f[0]], &b = vertices_[f[1]], &c = vertices_[f[2]];
        const Vec3 n = (b - a).cross(c - a);
        for (int i : f)
            normals_[i] += n;
        six_volume += (a - origin).dot((b - origin).cross(c - origin));
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2] || 0.5 * n.norm() < kDegenerateArea)
            ++degenerate_faces_;
    }
    for (Vec3 &n : normals_) {
        const double len = n.norm();
        n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    }
    signed_volume_ = six_volume / 6.0;

    const auto uses = edge_uses(faces_);
    boundary_edges_ = non_manifold_edges_ = edge_count_ = 0;
    bool consistent = true;
    for (std::size_t i = 0; i < uses.size();) {
        std::size_t j = i;
        while (j < uses.size() && uses[j].key == uses[i].key)
            ++j;
        const std::size_t count = j - i;
        ++edge_count_;
        if (count == 1)
            ++boundary_edges_;
        else if (count > 2)
            ++non_manifold_edges_;
        else if (uses[i].forward == uses[i + 1].forward)
            consistent = false;
        i = j;
    }
    watertight_ = !faces_.empty() && boundary_edges_ == 0 && non_manifold_edges_ == 0 && consistent &&
                  degenerate_faces_ == 0;
}

std::array<Vec3, 3> TriMesh::triangle(std::size_t f) const
{
    const Face &t = faces_[f];
    return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
}

Vec3 TriMesh::face_normal(std::size_t f) const
{
    const auto [a, b, c] = triangle(f);
    const Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

double TriMesh::face_area(std::size_t f) const
{
    const auto [a, b, c] = triangle(f);
    return triangle_area(a, b, c);
}

double TriMesh::surface_area() const
{
    double area = 0.0;
    for (std::size_t f = 0; f < faces_.size(); ++f)
        area += face_area(f);
    return area;
}

long TriMesh::euler_characteristic() const
{
    std::vector<char> used(vertices_.size(), 0);
    for (const Face &f : faces_)
        for (int i : f)
            used[i] = 1;
    const long v = std::count(used.begin(), used.end(), 1);
    return v - static_cast<long>(edge_count_) + static_cast<long>(faces_.size());
}

TriMesh TriMesh::flipped() const
{
    std::vector<Face> faces = faces_;
    for (Face &f : faces)
        std::swap(f[1], f[2]);
    return TriMesh(vertices_, std::move(faces));
}

TriMesh TriMesh::translated(const Vec3 &offset) const
{
    std::vector<Vec3> verts = vertices_;
    for (Vec3 &v : verts)
        v += offset;
    return TriMesh(std::move(verts), faces_);
}

TriMesh TriMesh::transformed(const Eigen::Isometry3d &xf) const
{
    std::vector<Vec3> verts = vertices_;
    for (Vec3 &v : verts)
        v = xf * v;
    return TriMesh(std::move(verts), faces_);
}

TriMesh concatenate(std::span<const TriMesh> meshes)
{
    std::vector<Vec3> verts;
    std::vector<Face> faces;
    for (const TriMesh &m : meshes) {
        const int base = static_cast<int>(verts.size());
        verts.insert(verts.end(), m.vertices().begin(), m.vertices().end());
        for (const Face &f : m.faces())
            faces.push_back({f[0] + base, f[1] + base, f[2] + base});
    }
    return TriMesh(std::move(verts), std::move(faces));
}

TriMesh weld(const std::vector<Vec3> &vertices, const std::vector<Face> &faces, double tolerance)
{
    struct CellHash {
        std::size_t operator()(const std::array<long long, 3> &k) const
        {
            std::size_t h = static_cast<std::size_t>(k[0]) * 73856093u;
            h ^= static_cast<std::size_t>(k[1]) * 19349663u;
            h ^= static_cast<std::size_t>(k[2]) * 83492791u;
            return h;
        }
    };
    const double cell = std::max(tolerance, 1e-12);
    std::unordered_map<std::array<long long, 3>, std::vector<int>, CellHash> grid;
    grid.reserve(vertices.size());
    std::vector<int> remap(vertices.size(), -1);
    std::vector<Vec3> out_verts;
    const double tol2 = tolerance * tolerance;

    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Vec3 &p = vertices[i];
        const std::array<long long, 3> key{static_cast<long long>(std::floor(p.x() / cell)),
                                           static_cast<long long>(std::floor(p.y() / cell)),
                                           static_cast<long long>(std::floor(p.z() / cell))};
        int found = -1;
        for (long long dx = -1; dx <= 1 && found < 0; ++dx)
            for (long long dy = -1; dy <= 1 && found < 0; ++dy)
                for (long long dz = -1; dz <= 1 && found < 0; ++dz) {
                    auto it = grid.find({key[0] + dx, key[1] + dy, key[2] + dz});
                    if (it == grid.end())
                        continue;
                    for (int cand : it->second)
                        if ((out_verts[cand] - p).squaredNorm() <= tol2) {
                            found = cand;
                            break;
                        }
                }
        if (found < 0) {
            found = static_cast<int>(out_verts.size());
            out_verts.push_back(p);
            grid[key].push_back(found);
        }
        remap[i] = found;
    }

    std::vector<Face> out_faces;
    out_faces.reserve(faces.size());
    for (const Face &f : faces) {
        const Face g{remap[f[0]], remap[f[1]], remap[f[2]]};
        if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2])
            continue;
        out_faces.push_back(g);
    }

    // Compact unreferenced vertices.
    std::vector<int> used(out_verts.size(), -1);
    std::vector<Vec3> compact;
    for (Face &f : out_faces)
        for (int &i : f) {
            if (used[i] < 0) {
                used[i] = static_cast<int>(compact.size());
                compact.push_back(out_verts[i]);
            }
            i = used[i];
        }
    return TriMesh(std::move(compact), std::move(out_faces));
}

TriMesh cancel_opposite_faces(const TriMesh &mesh)
{
    struct Keyed {
        std::array<int, 3> sorted;
        bool parity; // orientation class of the original cyclic order
        int face;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(mesh.face_count());
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        Face t = mesh.faces()[f];
        // Rotate so the smallest index is first; the remaining order gives the winding.
        const auto m = std::min_element(t.begin(), t.end()) - t.begin();
        std::rotate(t.begin(), t.begin() + m, t.end());
        std::array<int, 3> s = t;
        const bool parity = t[1] < t[2];
        std::sort(s.begin(), s.end());
        keyed.push_back({s, parity, static_cast<int>(f)});
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed &a, const Keyed &b) {
        return a.sorted != b.sorted ? a.sorted < b.sorted : a.face < b.face;
    });
    std::vector<char> removed(mesh.face_count(), 0);
    for (std::size_t i = 0; i < keyed.size();) {
        std::size_t j = i;
        while (j < keyed.size() && keyed[j].sorted == keyed[i].sorted)
            ++j;
        std::vector<int> pos, neg;
        for (std::size_t k = i; k < j; ++k)
            (keyed[k].parity ? pos : neg).push_back(keyed[k].face);
        const std::size_t pairs = std::min(pos.size(), neg.size());
        for (std::size_t k = 0; k < pairs; ++k)
            removed[pos[k]] = removed[neg[k]] = 1;
        i = j;
    }
    std::vector<Face> faces;
    for (std::size_t f = 0; f < mesh.face_count(); ++f)
        if (!removed[f])
            faces.push_back(mesh.faces()[f]);
    return weld(mesh.vertices(), faces, 0.0);
}

TriMesh union_touching(std::span<const TriMesh> solids, double weld_tolerance)
{
    const TriMesh joined = concatenate(solids);
    const TriMesh welded = weld(joined.vertices(), joined.faces(), weld_tolerance);
    return cancel_opposite_faces(welded);
}

std::vector<DirectedEdge> boundary_edges(const TriMesh &mesh)
{
    const auto uses = edge_uses(mesh.faces());
    std::vector<std::pair<int, int>> found; // (face, local edge)
    for (std::size_t i = 0; i < uses.size();) {
        std::size_t j = i;
        while (j < uses.size() && uses[j].key == uses[i].key)
            ++j;
        if (j - i == 1) {
            const Face &f = mesh.faces()[uses[i].face];
            for (int k = 0; k < 3; ++k)
                if (edge_key(f[k], f[(k + 1) % 3]) == uses[i].key)
                    found.emplace_back(uses[i].face, k);
        }
        i = j;
    }
    std::sort(found.begin(), found.end());
    std::vector<DirectedEdge> edges;
    for (auto [face, k] : found) {
        const Face &f = mesh.faces()[face];
        edges.push_back({f[k], f[(k + 1) % 3]});
    }
    return edges;
}

std::vector<std::vector<int>> vertex_neighbors(const TriMesh &mesh)
{
    std::vector<std::vector<int>> nb(mesh.vertex_count());
    for (const Face &f : mesh.faces())
        for (int k = 0; k < 3; ++k) {
            nb[f[k]].push_back(f[(k + 1) % 3]);
            nb[f[k]].push_back(f[(k + 2) % 3]);
        }
    for (auto &list : nb) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return nb;
}

std::vector<char> boundary_vertices(const TriMesh &mesh)
{
    std::vector<char> flag(mesh.vertex_count(), 0);
    for (const auto &e : boundary_edges(mesh))
        flag[e.from] = flag[e.to] = 1;
    return flag;
}

} // namespace magneto
