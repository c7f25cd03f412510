#include "magneto/remesh.hpp"

#include "magneto/bvh.hpp"
#include "magneto/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace magneto {

double EdgeLengthStats::fraction_within(double reference, double lo, double hi) const
{
    if (lengths.empty())
        return 0.0;
    const auto n = std::count_if(lengths.begin(), lengths.end(),
                                 [&](double l) { return l >= lo * reference && l <= hi * reference; });
    return static_cast<double>(n) / static_cast<double>(lengths.size());
}

namespace {

std::uint64_t edge_key(int a, int b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

std::pair<int, int> key_vertices(std::uint64_t key)
{
    return {static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)};
}

// Closest point on a set of segments (the input boundary).
struct BoundaryCurve {
    std::vector<std::pair<Vec3, Vec3>> segments;

    Vec3 project(const Vec3 &p) const
    {
        Vec3 best = p;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto &[a, b] : segments) {
            double t = 0.0;
            const double d = point_segment_distance(p, a, b, &t);
            if (d < best_d) {
                best_d = d;
                best = a + t * (b - a);
            }
        }
        return best;
    }
};

class Remesher {
public:
    Remesher(const TriMesh &reference, double target)
        : reference_(reference), bvh_(reference), target_(target), pos_(reference.vertices()),
          faces_(reference.faces())
    {
        for (const DirectedEdge &e : boundary_edges(reference))
            boundary_.segments.emplace_back(reference.vertex(e.from), reference.vertex(e.to));
        corner_.assign(pos_.size(), 0);
        mark_corners();
    }

    TriMesh run(const RemeshOptions &options)
    {
        const double hi = 4.0 / 3.0 * target_, lo = 0.8 * target_;
        // Coarse inputs are first refined well below the target: reaching it
        // by collapses gives far more even spacing than repeated halving.
        if (split_long_edges(hi))
            for (int i = 0; i < 12 && split_long_edges(0.5 * target_); ++i) {
            }
        for (int iter = 0; iter < options.max_iterations; ++iter) {
            for (int i = 0; i < 12 && split_long_edges(hi); ++i) {
            }
            for (int i = 0; i < 30 && collapse_short_edges(lo, hi); ++i) {
            }
            for (int i = 0; i < 4 && flip_edges(); ++i) {
            }
            relax();
        }
        for (int i = 0; i < options.relax_sweeps; ++i)
            relax();
        for (int i = 0; i < options.equalize_sweeps; ++i)
            equalize();
        compact();
        return TriMesh(pos_, faces_);
    }

private:
    // Boundary vertices where the boundary turns by more than 30 degrees.
    void mark_corners()
    {
        std::vector<std::vector<int>> bn(pos_.size());
        for (const DirectedEdge &e : boundary_edges(reference_)) {
            bn[e.from].push_back(e.to);
            bn[e.to].push_back(e.from);
        }
        for (std::size_t v = 0; v < pos_.size(); ++v) {
            if (bn[v].empty())
                continue;
            if (bn[v].size() != 2) {
                corner_[v] = 1;
                continue;
            }
            const Vec3 a = (pos_[v] - pos_[bn[v][0]]).normalized();
            const Vec3 b = (pos_[bn[v][1]] - pos_[v]).normalized();
            if (a.dot(b) < std::cos(M_PI / 6.0))
                corner_[v] = 1;
        }
    }

    struct EdgeFaces {
        int f0 = -1, f1 = -1, count = 0;
    };

    void rebuild()
    {
        edges_.clear();
        edges_.reserve(faces_.size() * 2);
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            if (!alive(f))
                continue;
            for (int k = 0; k < 3; ++k) {
                EdgeFaces &e = edges_[edge_key(faces_[f][k], faces_[f][(k + 1) % 3])];
                (e.count == 0 ? e.f0 : e.f1) = static_cast<int>(f);
                ++e.count;
            }
        }
        is_boundary_.assign(pos_.size(), 0);
        valence_.assign(pos_.size(), 0);
        for (const auto &[key, e] : edges_) {
            const auto [a, b] = key_vertices(key);
            ++valence_[a];
            ++valence_[b];
            if (e.count == 1)
                is_boundary_[a] = is_boundary_[b] = 1;
        }
        vertex_faces_.assign(pos_.size(), {});
        for (std::size_t f = 0; f < faces_.size(); ++f)
            if (alive(f))
                for (int v : faces_[f])
                    vertex_faces_[v].push_back(static_cast<int>(f));
    }

    bool alive(std::size_t f) const { return faces_[f][0] >= 0; }

    Vec3 face_normal(const Face &f) const
    {
        return (pos_[f[1]] - pos_[f[0]]).cross(pos_[f[2]] - pos_[f[0]]);
    }

    bool split_long_edges(double hi)
    {
        rebuild();
        std::unordered_map<std::uint64_t, int> midpoint;
        std::vector<std::uint64_t> keys;
        for (const auto &[key, e] : edges_) {
            const auto [a, b] = key_vertices(key);
            if ((pos_[a] - pos_[b]).norm() > hi)
                keys.push_back(key);
        }
        if (keys.empty())
            return false;
        std::sort(keys.begin(), keys.end());
        for (std::uint64_t key : keys) {
            const auto [a, b] = key_vertices(key);
            midpoint[key] = static_cast<int>(pos_.size());
            pos_.push_back(0.5 * (pos_[a] + pos_[b]));
            corner_.push_back(0);
        }
        const std::size_t old_faces = faces_.size();
        for (std::size_t f = 0; f < old_faces; ++f) {
            if (!alive(f))
                continue;
            const Face face = faces_[f];
            int mids[3];
            int count = 0;
            for (int k = 0; k < 3; ++k) {
                const auto it = midpoint.find(edge_key(face[k], face[(k + 1) % 3]));
                mids[k] = it == midpoint.end() ? -1 : it->second;
                count += mids[k] >= 0;
            }
            if (count == 0)
                continue;
            std::vector<Face> pieces;
            if (count == 3) {
                pieces = {{face[0], mids[0], mids[2]},
                          {mids[0], face[1], mids[1]},
                          {mids[2], mids[1], face[2]},
                          {mids[0], mids[1], mids[2]}};
            } else if (count == 1) {
                const int k = mids[0] >= 0 ? 0 : mids[1] >= 0 ? 1 : 2;
                const int a = face[k], b = face[(k + 1) % 3], c = face[(k + 2) % 3], m = mids[k];
                pieces = {{a, m, c}, {m, b, c}};
            } else {
                // Rotate so the unsplit edge is (c, a).
                const int k = mids[0] < 0 ? 1 : mids[1] < 0 ? 2 : 0;
                const int a = face[k], b = face[(k + 1) % 3], c = face[(k + 2) % 3];
                const int m1 = mids[k], m2 = mids[(k + 1) % 3];
                pieces.push_back({m1, b, m2});
                if ((pos_[a] - pos_[m2]).squaredNorm() < (pos_[m1] - pos_[c]).squaredNorm()) {
                    pieces.push_back({a, m1, m2});
                    pieces.push_back({a, m2, c});
                } else {
                    pieces.push_back({a, m1, c});
                    pieces.push_back({m1, m2, c});
                }
            }
            faces_[f] = pieces[0];
            for (std::size_t i = 1; i < pieces.size(); ++i)
                faces_.push_back(pieces[i]);
        }
        for (const auto &[key, m] : midpoint)
            pos_[m] = project(m, pos_[m]);
        return true;
    }

    std::vector<int> neighbours(int v) const
    {
        std::vector<int> out;
        for (int f : vertex_faces_[v])
            if (alive(f))
                for (int w : faces_[f])
                    if (w != v)
                        out.push_back(w);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    bool collapse_short_edges(double lo, double hi)
    {
        rebuild();
        std::vector<std::pair<double, std::uint64_t>> order;
        for (const auto &[key, e] : edges_) {
            const auto [a, b] = key_vertices(key);
            const double len = (pos_[a] - pos_[b]).norm();
            if (len < lo)
                order.emplace_back(len, key);
        }
        std::sort(order.begin(), order.end());
        std::vector<char> touched(pos_.size(), 0);
        bool changed = false;
        for (const auto &[len, key] : order) {
            auto [a, b] = key_vertices(key);
            if (touched[a] || touched[b])
                continue;
            const EdgeFaces &ef = edges_.at(key);
            const bool edge_on_boundary = ef.count == 1;
            if (corner_[a] && corner_[b])
                continue;
            if (is_boundary_[a] && is_boundary_[b] && !edge_on_boundary)
                continue;
            // Keep `a`; pick the survivor that preserves corners and boundary.
            if (corner_[b] || (is_boundary_[b] && !is_boundary_[a]))
                std::swap(a, b);
            Vec3 target;
            if (corner_[a] || (is_boundary_[a] && !is_boundary_[b]))
                target = pos_[a];
            else
                target = 0.5 * (pos_[a] + pos_[b]);

            const std::vector<int> na = neighbours(a), nb = neighbours(b);
            std::vector<int> common;
            std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
            if (common.size() != static_cast<std::size_t>(edge_on_boundary ? 1 : 2))
                continue;
            bool ok = true;
            for (int c : common)
                ok &= valence_[c] > 3;
            if (!ok)
                continue;
            for (const auto *ring : {&na, &nb})
                for (int v : *ring)
                    if (v != a && v != b && (pos_[v] - target).norm() > hi)
                        ok = false;
            if (!ok)
                continue;
            // Faces that survive must not flip or degenerate.
            for (int v : {a, b}) {
                for (int f : vertex_faces_[v]) {
                    if (!alive(f))
                        continue;
                    const Face &face = faces_[f];
                    if (std::find(face.begin(), face.end(), a) != face.end() &&
                        std::find(face.begin(), face.end(), b) != face.end())
                        continue;
                    Face moved = face;
                    const Vec3 before = face_normal(face);
                    const Vec3 saved_a = pos_[a];
                    for (int &w : moved)
                        if (w == b)
                            w = a;
                    pos_[a] = target;
                    const Vec3 after = face_normal(moved);
                    pos_[a] = saved_a;
                    if (after.norm() < 1e-12 * target_ * target_ ||
                        after.dot(before) < 0.3 * after.norm() * before.norm())
                        ok = false;
                }
            }
            if (!ok)
                continue;

            for (int f : vertex_faces_[b]) {
                if (!alive(f))
                    continue;
                Face &face = faces_[f];
                if (std::find(face.begin(), face.end(), a) != face.end()) {
                    face = {-1, -1, -1};
                    continue;
                }
                for (int &w : face)
                    if (w == b)
                        w = a;
                vertex_faces_[a].push_back(f);
            }
            vertex_faces_[b].clear();
            pos_[a] = target;
            for (int v : common)
                --valence_[v];
            touched[a] = touched[b] = 1;
            for (int v : na)
                touched[v] = 1;
            for (int v : nb)
                touched[v] = 1;
            changed = true;
        }
        if (changed)
            drop_dead_faces();
        return changed;
    }

    void drop_dead_faces()
    {
        faces_.erase(std::remove_if(faces_.begin(), faces_.end(), [](const Face &f) { return f[0] < 0; }),
                     faces_.end());
    }

    bool flip_edges()
    {
        rebuild();
        std::unordered_set<std::uint64_t> present;
        present.reserve(edges_.size() * 2);
        std::vector<std::uint64_t> keys;
        for (const auto &[key, e] : edges_) {
            present.insert(key);
            if (e.count == 2)
                keys.push_back(key);
        }
        std::sort(keys.begin(), keys.end());
        std::vector<char> face_touched(faces_.size(), 0);
        bool changed = false;
        auto target_valence = [&](int v) { return is_boundary_[v] ? 4 : 6; };
        for (std::uint64_t key : keys) {
            const EdgeFaces &ef = edges_.at(key);
            if (face_touched[ef.f0] || face_touched[ef.f1])
                continue;
            auto [a, b] = key_vertices(key);
            // Orient so f0 contains a -> b.
            const Face &f0 = faces_[ef.f0], &f1 = faces_[ef.f1];
            int k0 = 0;
            while (f0[k0] != a)
                ++k0;
            if (f0[(k0 + 1) % 3] != b) {
                std::swap(a, b);
                k0 = 0;
                while (f0[k0] != a)
                    ++k0;
            }
            const int c = f0[(k0 + 2) % 3];
            int d = -1;
            for (int w : f1)
                if (w != a && w != b)
                    d = w;
            if (d < 0 || c == d || present.count(edge_key(c, d)))
                continue;
            const int before = std::abs(valence_[a] - target_valence(a)) + std::abs(valence_[b] - target_valence(b)) +
                               std::abs(valence_[c] - target_valence(c)) + std::abs(valence_[d] - target_valence(d));
            const int after = std::abs(valence_[a] - 1 - target_valence(a)) +
                              std::abs(valence_[b] - 1 - target_valence(b)) +
                              std::abs(valence_[c] + 1 - target_valence(c)) +
                              std::abs(valence_[d] + 1 - target_valence(d));
            if (after >= before)
                continue;
            const Vec3 n0 = face_normal(f0), n1 = face_normal(f1);
            if (n0.normalized().dot(n1.normalized()) < std::cos(M_PI / 6.0))
                continue;
            const Face g0 = {c, a, d}, g1 = {d, b, c};
            const Vec3 m0 = face_normal(g0), m1 = face_normal(g1);
            const Vec3 avg = n0 + n1;
            if (m0.dot(avg) <= 0.2 * m0.norm() * avg.norm() || m1.dot(avg) <= 0.2 * m1.norm() * avg.norm())
                continue;
            present.erase(key);
            present.insert(edge_key(c, d));
            faces_[ef.f0] = g0;
            faces_[ef.f1] = g1;
            face_touched[ef.f0] = face_touched[ef.f1] = 1;
            --valence_[a];
            --valence_[b];
            ++valence_[c];
            ++valence_[d];
            changed = true;
        }
        return changed;
    }

    Vec3 project(int v, const Vec3 &p) const
    {
        if (corner_[v])
            return p;
        if (!boundary_.segments.empty() && on_boundary(v))
            return boundary_.project(p);
        return bvh_.closest(p).point;
    }

    bool on_boundary(int v) const
    {
        return static_cast<std::size_t>(v) < is_boundary_.size() && is_boundary_[v];
    }

    // Area-weighted tangential relaxation followed by projection.
    void relax()
    {
        rebuild();
        const std::size_t n = pos_.size();
        std::vector<Vec3> centroid(n, Vec3::Zero()), normal(n, Vec3::Zero());
        std::vector<double> weight(n, 0.0);
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            const Face &face = faces_[f];
            const Vec3 nf = face_normal(face);
            const double area = 0.5 * nf.norm();
            const Vec3 c = (pos_[face[0]] + pos_[face[1]] + pos_[face[2]]) / 3.0;
            for (int v : face) {
                centroid[v] += area * c;
                weight[v] += area;
                normal[v] += nf;
            }
        }
        // Boundary vertices slide along the boundary towards the midpoint of
        // their two boundary neighbours.
        std::vector<Vec3> bsum(n, Vec3::Zero());
        std::vector<int> bcount(n, 0);
        for (const auto &[key, e] : edges_) {
            if (e.count != 1)
                continue;
            const auto [a, b] = key_vertices(key);
            bsum[a] += pos_[b];
            bsum[b] += pos_[a];
            ++bcount[a];
            ++bcount[b];
        }
        std::vector<Vec3> next = pos_;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            const auto v = static_cast<std::size_t>(i);
            if (corner_[v] || weight[v] <= 0.0)
                continue;
            if (is_boundary_[v]) {
                if (bcount[v] == 2)
                    next[v] = project(static_cast<int>(v), 0.5 * (pos_[v] + bsum[v] / 2.0));
                continue;
            }
            const Vec3 nv = normal[v].normalized();
            const Vec3 delta = centroid[v] / weight[v] - pos_[v];
            next[v] = project(static_cast<int>(v), pos_[v] + delta - nv.dot(delta) * nv);
        }
        pos_ = std::move(next);
    }

    // Spring step pulling every interior edge towards the current mean edge
    // length; evens out spacing that centroid relaxation leaves behind.
    void equalize()
    {
        rebuild();
        const std::size_t n = pos_.size();
        double total = 0.0;
        for (const auto &[key, e] : edges_) {
            const auto [a, b] = key_vertices(key);
            total += (pos_[a] - pos_[b]).norm();
        }
        if (edges_.empty())
            return;
        const double rest = total / static_cast<double>(edges_.size());
        std::vector<Vec3> force(n, Vec3::Zero()), normal(n, Vec3::Zero());
        std::vector<int> degree(n, 0);
        for (const auto &[key, e] : edges_) {
            const auto [a, b] = key_vertices(key);
            const Vec3 d = pos_[b] - pos_[a];
            const double len = d.norm();
            if (len <= 0.0)
                continue;
            const Vec3 f = (len - rest) / len * d;
            force[a] += f;
            force[b] -= f;
            ++degree[a];
            ++degree[b];
        }
        for (const Face &face : faces_)
            for (int v : face)
                normal[v] += face_normal(face);
        std::vector<Vec3> next = pos_;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            const auto v = static_cast<std::size_t>(i);
            if (corner_[v] || is_boundary_[v] || degree[v] == 0)
                continue;
            const Vec3 nv = normal[v].normalized();
            const Vec3 delta = 0.5 * force[v] / degree[v];
            next[v] = project(static_cast<int>(v), pos_[v] + delta - nv.dot(delta) * nv);
        }
        pos_ = std::move(next);
    }

    void compact()
    {
        drop_dead_faces();
        std::vector<int> remap(pos_.size(), -1);
        std::vector<Vec3> verts;
        for (Face &f : faces_)
            for (int &v : f) {
                if (remap[v] < 0) {
                    remap[v] = static_cast<int>(verts.size());
                    verts.push_back(pos_[v]);
                }
                v = remap[v];
            }
        pos_ = std::move(verts);
    }

    const TriMesh &reference_;
    Bvh bvh_;
    BoundaryCurve boundary_;
    double target_;
    std::vector<Vec3> pos_;
    std::vector<Face> faces_;
    std::vector<char> corner_;
    std::vector<char> is_boundary_;
    std::vector<int> valence_;
    std::vector<std::vector<int>> vertex_faces_;
    std::unordered_map<std::uint64_t, EdgeFaces> edges_;
};

} // namespace

EdgeLengthStats edge_lengths(const TriMesh &mesh)
{
    EdgeLengthStats stats;
    std::unordered_set<std::uint64_t> seen;
    for (const Face &f : mesh.faces())
        for (int k = 0; k < 3; ++k) {
            const int a = f[k], b = f[(k + 1) % 3];
            if (seen.insert(edge_key(a, b)).second)
                stats.lengths.push_back((mesh.vertex(a) - mesh.vertex(b)).norm());
        }
    stats.count = stats.lengths.size();
    if (stats.count > 0) {
        stats.mean = std::accumulate(stats.lengths.begin(), stats.lengths.end(), 0.0) / stats.count;
        const auto [lo, hi] = std::minmax_element(stats.lengths.begin(), stats.lengths.end());
        stats.min = *lo;
        stats.max = *hi;
    }
    return stats;
}

TriMesh remesh_isotropic(const TriMesh &mesh, double target_edge, const RemeshOptions &options)
{
    if (!(target_edge > 0.0))
        throw Error(ErrorCode::InvalidArgument, "remesh target edge must be positive");
    if (mesh.empty())
        throw Error(ErrorCode::InvalidArgument, "cannot remesh an empty mesh");
    Remesher remesher(mesh, target_edge);
    TriMesh out = remesher.run(options);
    const EdgeLengthStats stats = edge_lengths(out);
    const double within = stats.fraction_within(target_edge, 0.7, 1.3);
    if (within < options.required_fraction) {
        std::ostringstream msg;
        msg << "remeshing left only " << within * 100.0 << "% of edges within 30% of " << target_edge << " mm";
        throw Error(ErrorCode::RemeshDiverged, msg.str());
    }
    return out;
}

} // namespace magneto
