#include "magneto/boolean.hpp"

#include "magneto/bvh.hpp"
#include "magneto/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace magneto {

namespace {

// Raised when the operands are not in general position.
struct Degenerate {
    const char *reason;
};

std::uint64_t edge_key(int a, int b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

struct PairHash {
    std::size_t operator()(const std::pair<std::uint64_t, int> &k) const
    {
        return std::hash<std::uint64_t>()(k.first * 1000003u ^ static_cast<std::uint64_t>(k.second));
    }
};

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

double cross2d(const Vec2 &o, const Vec2 &a, const Vec2 &b) { return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x(); }

// Ear clipping of a weakly simple counter-clockwise polygon (holes already
// bridged in). Vertices are indices into `pts`; equal indices may repeat.
bool ear_clip(const std::vector<Vec2> &pts, std::vector<int> poly, std::vector<std::array<int, 3>> &out)
{
    auto strictly_convex = [&](int a, int b, int c) {
        const double cr = cross2d(pts[a], pts[b], pts[c]);
        return cr > 1e-14 * (pts[b] - pts[a]).norm() * (pts[c] - pts[b]).norm() && cr > 0.0;
    };
    // Strictly inside the ear, or on its new diagonal c-a.
    auto blocks = [&](const Vec2 &p, int a, int b, int c) {
        const double s0 = cross2d(pts[a], pts[b], p), s1 = cross2d(pts[b], pts[c], p),
                     s2 = cross2d(pts[c], pts[a], p);
        if (s0 > 0.0 && s1 > 0.0 && s2 > 0.0)
            return true;
        const Vec2 d = pts[a] - pts[c];
        const double t = (p - pts[c]).dot(d) / d.squaredNorm();
        return s0 >= 0.0 && s1 >= 0.0 && std::abs(s2) <= 1e-12 * d.squaredNorm() && t > 0.0 && t < 1.0;
    };
    std::size_t guard = 0;
    while (poly.size() > 3) {
        bool clipped = false;
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            const int a = poly[(i + n - 1) % n], b = poly[i], c = poly[(i + 1) % n];
            if (!strictly_convex(a, b, c))
                continue;
            bool blocked = false;
            for (std::size_t j = 0; j < n && !blocked; ++j) {
                const int v = poly[j];
                if (v == a || v == b || v == c)
                    continue;
                if (pts[v] == pts[a] || pts[v] == pts[b] || pts[v] == pts[c])
                    continue;
                blocked = blocks(pts[v], a, b, c);
            }
            if (blocked)
                continue;
            out.push_back({a, b, c});
            poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(i));
            clipped = true;
            break;
        }
        if (!clipped || ++guard > 100000)
            return false;
    }
    if (poly.size() == 3) {
        if (!strictly_convex(poly[0], poly[1], poly[2]))
            return false;
        out.push_back({poly[0], poly[1], poly[2]});
    }
    return true;
}

bool segments_cross(const Vec2 &a, const Vec2 &b, const Vec2 &c, const Vec2 &d)
{
    const double d1 = cross2d(a, b, c), d2 = cross2d(a, b, d);
    const double d3 = cross2d(c, d, a), d4 = cross2d(c, d, b);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

// Splices each clockwise hole into the counter-clockwise outer loop through
// a bridge to the nearest mutually visible vertex.
bool bridge_holes(const std::vector<Vec2> &pts, std::vector<int> &outer, std::vector<std::vector<int>> holes)
{
    std::sort(holes.begin(), holes.end(), [&](const auto &h1, const auto &h2) {
        auto maxx = [&](const std::vector<int> &h) {
            double m = -1e300;
            for (int v : h)
                m = std::max(m, pts[v].x());
            return m;
        };
        return maxx(h1) > maxx(h2);
    });
    for (std::size_t hi = 0; hi < holes.size(); ++hi) {
        const std::vector<int> &hole = holes[hi];
        std::size_t best_h = 0, best_o = 0;
        double best = std::numeric_limits<double>::infinity();
        auto visible = [&](const Vec2 &p, const Vec2 &q) {
            auto check = [&](const std::vector<int> &loop) {
                for (std::size_t k = 0; k < loop.size(); ++k)
                    if (segments_cross(p, q, pts[loop[k]], pts[loop[(k + 1) % loop.size()]]))
                        return false;
                return true;
            };
            if (!check(outer))
                return false;
            for (std::size_t other = hi; other < holes.size(); ++other)
                if (!check(holes[other]))
                    return false;
            return true;
        };
        for (std::size_t h = 0; h < hole.size(); ++h)
            for (std::size_t o = 0; o < outer.size(); ++o) {
                const double d = (pts[hole[h]] - pts[outer[o]]).squaredNorm();
                if (d < best && visible(pts[hole[h]], pts[outer[o]])) {
                    best = d;
                    best_h = h;
                    best_o = o;
                }
            }
        if (!std::isfinite(best))
            return false;
        std::vector<int> merged(outer.begin(), outer.begin() + static_cast<std::ptrdiff_t>(best_o) + 1);
        for (std::size_t k = 0; k <= hole.size(); ++k)
            merged.push_back(hole[(best_h + k) % hole.size()]);
        merged.insert(merged.end(), outer.begin() + static_cast<std::ptrdiff_t>(best_o), outer.end());
        outer = std::move(merged);
    }
    return true;
}

double loop_area(const std::vector<Vec2> &pts, const std::vector<int> &loop)
{
    double a = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i)
        a += cross2(pts[loop[i]], pts[loop[(i + 1) % loop.size()]]);
    return 0.5 * a;
}

bool point_in_loop(const std::vector<Vec2> &pts, const std::vector<int> &loop, const Vec2 &p)
{
    bool in = false;
    for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
        const Vec2 &a = pts[loop[i]], &b = pts[loop[j]];
        if ((a.y() > p.y()) != (b.y() > p.y()) && p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
            in = !in;
    }
    return in;
}

// Triangulates a planar straight-line graph made of the boundary loop
// `boundary` (counter-clockwise) and non-crossing constraint segments.
// Returns triangles over local vertex indices.
std::vector<std::array<int, 3>> triangulate_face(const std::vector<Vec2> &pts, const std::vector<int> &boundary,
                                                 const std::vector<std::pair<int, int>> &segments)
{
    const int n = static_cast<int>(pts.size());
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<int, int>> edges;
    auto add_edge = [&](int a, int b) {
        if (a == b)
            throw Degenerate{"zero-length constraint edge"};
        if (seen.insert(edge_key(a, b)).second)
            edges.emplace_back(a, b);
    };
    for (std::size_t i = 0; i < boundary.size(); ++i)
        add_edge(boundary[i], boundary[(i + 1) % boundary.size()]);
    for (const auto &[a, b] : segments)
        add_edge(a, b);

    // Half-edge h = 2e goes first->second, 2e+1 the reverse.
    const int hcount = static_cast<int>(edges.size()) * 2;
    auto origin = [&](int h) { return h % 2 == 0 ? edges[h / 2].first : edges[h / 2].second; };
    auto dest = [&](int h) { return origin(h ^ 1); };
    std::vector<std::vector<int>> outgoing(n);
    for (int h = 0; h < hcount; ++h)
        outgoing[origin(h)].push_back(h);
    std::vector<int> slot(hcount);
    for (int v = 0; v < n; ++v) {
        auto &out = outgoing[v];
        std::sort(out.begin(), out.end(), [&](int h1, int h2) {
            const Vec2 d1 = pts[dest(h1)] - pts[v], d2 = pts[dest(h2)] - pts[v];
            return std::atan2(d1.y(), d1.x()) < std::atan2(d2.y(), d2.x());
        });
        for (std::size_t k = 0; k < out.size(); ++k)
            slot[out[k]] = static_cast<int>(k);
    }
    auto next = [&](int h) {
        const int twin = h ^ 1;
        const int v = dest(h);
        const auto &out = outgoing[v];
        const int k = slot[twin];
        return out[(k + static_cast<int>(out.size()) - 1) % static_cast<int>(out.size())];
    };

    UnionFind comp(static_cast<std::size_t>(n));
    for (const auto &[a, b] : edges)
        comp.unite(a, b);

    std::vector<char> used(hcount, 0);
    std::vector<std::vector<int>> positive, negative;
    for (int h = 0; h < hcount; ++h) {
        if (used[h])
            continue;
        std::vector<int> loop;
        int cur = h;
        while (!used[cur]) {
            used[cur] = 1;
            loop.push_back(origin(cur));
            cur = next(cur);
            if (loop.size() > static_cast<std::size_t>(hcount))
                throw Degenerate{"unbounded face trace"};
        }
        if (cur != h)
            throw Degenerate{"open face trace"};
        (loop_area(pts, loop) > 0.0 ? positive : negative).push_back(std::move(loop));
    }

    const int outer_comp = comp.find(boundary[0]);
    std::vector<std::vector<std::vector<int>>> holes(positive.size());
    for (const auto &neg : negative) {
        const int c = comp.find(neg[0]);
        if (c == outer_comp)
            continue;
        int owner = -1;
        double owner_area = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < positive.size(); ++p) {
            if (comp.find(positive[p][0]) == c)
                continue;
            const double area = loop_area(pts, positive[p]);
            if (area < owner_area && point_in_loop(pts, positive[p], pts[neg[0]])) {
                owner = static_cast<int>(p);
                owner_area = area;
            }
        }
        if (owner < 0)
            throw Degenerate{"hole outside every region"};
        holes[owner].push_back(neg);
    }

    std::vector<std::array<int, 3>> tris;
    for (std::size_t p = 0; p < positive.size(); ++p) {
        std::vector<int> loop = positive[p];
        if (!holes[p].empty() && !bridge_holes(pts, loop, holes[p]))
            throw Degenerate{"hole bridge failed"};
        if (!ear_clip(pts, loop, tris))
            throw Degenerate{"ear clipping failed"};
    }
    return tris;
}

// Removes faces below the degenerate-area threshold left by near-collinear
// split points: needles lose their short edge by collapse, caps lose their
// long edge by a flip with the neighbouring face.
void remove_slivers(std::vector<Vec3> &verts, std::vector<Face> &faces, double eps)
{
    auto area = [&](const Face &f) { return triangle_area(verts[f[0]], verts[f[1]], verts[f[2]]); };
    const double threshold = 4.0 * kDegenerateArea;
    for (int round = 0; round < 50; ++round) {
        std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
        bool any = false;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            any |= area(faces[f]) < threshold;
            for (int k = 0; k < 3; ++k)
                edge_faces[edge_key(faces[f][k], faces[f][(k + 1) % 3])].push_back(static_cast<int>(f));
        }
        if (!any)
            return;
        std::vector<char> locked(faces.size(), 0);
        std::vector<int> merge(verts.size());
        std::iota(merge.begin(), merge.end(), 0);
        bool changed = false;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (locked[f] || area(faces[f]) >= threshold)
                continue;
            const Face face = faces[f];
            double len[3];
            for (int k = 0; k < 3; ++k)
                len[k] = (verts[face[(k + 1) % 3]] - verts[face[k]]).norm();
            const int shortest = static_cast<int>(std::min_element(len, len + 3) - len);
            const int longest = static_cast<int>(std::max_element(len, len + 3) - len);
            if (len[shortest] < std::max(1e3 * eps, 1e-3)) {
                const int a = face[shortest], b = face[(shortest + 1) % 3];
                if (merge[a] != a || merge[b] != b)
                    continue;
                merge[b] = a;
                for (int g : edge_faces[edge_key(a, b)])
                    locked[g] = 1;
                changed = true;
                continue;
            }
            const int a = face[longest], b = face[(longest + 1) % 3], c = face[(longest + 2) % 3];
            const auto &pair = edge_faces[edge_key(a, b)];
            if (pair.size() != 2)
                continue;
            const int g = pair[0] == static_cast<int>(f) ? pair[1] : pair[0];
            if (locked[g])
                continue;
            int d = -1;
            for (int w : faces[g])
                if (w != a && w != b)
                    d = w;
            if (d < 0 || edge_faces.count(edge_key(c, d)))
                continue;
            faces[f] = {c, a, d};
            faces[g] = {d, b, c};
            locked[f] = locked[g] = 1;
            changed = true;
        }
        if (!changed)
            return;
        std::vector<Face> kept;
        for (Face face : faces) {
            for (int &v : face)
                v = merge[v];
            if (face[0] != face[1] && face[1] != face[2] && face[0] != face[2])
                kept.push_back(face);
        }
        faces = std::move(kept);
    }
}

class BooleanSolver {
public:
    BooleanSolver(const TriMesh &a, const TriMesh &b) : a_(a), b_(b)
    {
        va_ = static_cast<int>(a.vertex_count());
        fa_ = static_cast<int>(a.face_count());
        points_ = a.vertices();
        points_.insert(points_.end(), b.vertices().begin(), b.vertices().end());
        faces_ = a.faces();
        for (Face f : b.faces()) {
            for (int &v : f)
                v += va_;
            faces_.push_back(f);
        }
        for (const Face &f : faces_) {
            const Vec3 n = (points_[f[1]] - points_[f[0]]).cross(points_[f[2]] - points_[f[0]]).normalized();
            normals_.push_back(n);
            offsets_.push_back(n.dot(points_[f[0]]));
        }
        Aabb all = a.bounds();
        all.extend(b.bounds());
        eps_ = 1e-10 * std::max(1.0, all.extent().maxCoeff());
    }

    TriMesh run(BooleanOp op)
    {
        intersect();
        std::vector<Face> pieces;
        std::vector<int> owner;  // source face per piece
        split(pieces, owner);
        return select(op, pieces, owner);
    }

private:
    bool in_b(int face) const { return face >= fa_; }

    double plane_distance(int face, int vertex) const
    {
        return normals_[face].dot(points_[vertex]) - offsets_[face];
    }

    // Signed volume of the tetrahedron spanned by two segments, evaluated in
    // one canonical vertex order so every caller agrees on its sign.
    double edge_edge(int p, int q, int r, int s) const
    {
        int sign = 1;
        if (p > q) {
            std::swap(p, q);
            sign = -sign;
        }
        if (r > s) {
            std::swap(r, s);
            sign = -sign;
        }
        if (p > r) {
            std::swap(p, r);
            std::swap(q, s);
        }
        const Vec3 u = points_[q] - points_[p];
        const Vec3 v = points_[r] - points_[p];
        const Vec3 w = points_[s] - points_[p];
        return sign * u.dot(v.cross(w));
    }

    // Point where edge (p, q) pierces `face`, or -1.
    int pierce(int p, int q, int face)
    {
        const auto key = std::make_pair(edge_key(p, q), face);
        if (const auto it = pierce_cache_.find(key); it != pierce_cache_.end())
            return it->second;
        int lo = std::min(p, q), hi = std::max(p, q);
        const double dl = plane_distance(face, lo), dh = plane_distance(face, hi);
        int result = -1;
        if ((dl > eps_ && dh < -eps_) || (dl < -eps_ && dh > eps_)) {
            const Face &f = faces_[face];
            double s[3];
            for (int k = 0; k < 3; ++k) {
                // Divided down to the in-plane distance between the piercing
                // point and the line through this triangle edge.
                const double edge_len = (points_[f[(k + 1) % 3]] - points_[f[k]]).norm();
                s[k] = edge_edge(lo, hi, f[k], f[(k + 1) % 3]);
                if (std::abs(s[k]) <= eps_ * std::abs(dh - dl) * edge_len)
                    throw Degenerate{"edge-face contact"};
            }
            if ((s[0] > 0) == (s[1] > 0) && (s[1] > 0) == (s[2] > 0)) {
                result = static_cast<int>(points_.size());
                const double t = dl / (dl - dh);
                points_.push_back(points_[lo] + t * (points_[hi] - points_[lo]));
                edge_points_[edge_key(p, q)].push_back(result);
            }
        }
        pierce_cache_.emplace(key, result);
        return result;
    }

    void intersect()
    {
        const Bvh bvh_b(b_);
        for (int fa = 0; fa < fa_; ++fa) {
            const auto ta = a_.triangle(static_cast<std::size_t>(fa));
            for (int local_b : bvh_b.faces_overlapping(triangle_box(ta[0], ta[1], ta[2]).inflated(eps_))) {
                const int fb = local_b + fa_;
                const Face &A = faces_[fa], &B = faces_[fb];
                double da[3], db[3];
                for (int k = 0; k < 3; ++k) {
                    da[k] = plane_distance(fb, A[k]);
                    db[k] = plane_distance(fa, B[k]);
                }
                auto one_side = [&](const double *d) {
                    return (d[0] > eps_ && d[1] > eps_ && d[2] > eps_) || (d[0] < -eps_ && d[1] < -eps_ && d[2] < -eps_);
                };
                if (one_side(da) || one_side(db))
                    continue;
                for (int k = 0; k < 3; ++k)
                    if (std::abs(da[k]) <= eps_ || std::abs(db[k]) <= eps_)
                        throw Degenerate{"vertex-plane contact"};
                int ends[6];
                int count = 0;
                for (int k = 0; k < 3; ++k) {
                    if (const int p = pierce(A[k], A[(k + 1) % 3], fb); p >= 0)
                        ends[count++] = p;
                    if (const int p = pierce(B[k], B[(k + 1) % 3], fa); p >= 0)
                        ends[count++] = p;
                }
                if (count == 0)
                    continue;
                if (count != 2)
                    throw Degenerate{"crossing count"};
                segments_[fa].emplace_back(ends[0], ends[1]);
                segments_[fb].emplace_back(ends[0], ends[1]);
            }
        }
    }

    void split(std::vector<Face> &pieces, std::vector<int> &owner)
    {
        for (int f = 0; f < static_cast<int>(faces_.size()); ++f) {
            const Face &face = faces_[f];
            const auto seg_it = segments_.find(f);
            bool touched = seg_it != segments_.end();
            for (int k = 0; k < 3 && !touched; ++k)
                touched = edge_points_.count(edge_key(face[k], face[(k + 1) % 3])) > 0;
            if (!touched) {
                pieces.push_back(face);
                owner.push_back(f);
                continue;
            }
            if (seg_it == segments_.end())
                throw Degenerate{"edge pierced without segment"};

            std::vector<int> global;
            std::unordered_map<int, int> local;
            auto local_id = [&](int g) {
                const auto [it, fresh] = local.emplace(g, static_cast<int>(global.size()));
                if (fresh)
                    global.push_back(g);
                return it->second;
            };
            std::vector<int> boundary;
            for (int k = 0; k < 3; ++k) {
                const int p = face[k], q = face[(k + 1) % 3];
                boundary.push_back(local_id(p));
                const auto it = edge_points_.find(edge_key(p, q));
                if (it == edge_points_.end())
                    continue;
                std::vector<int> on_edge = it->second;
                const Vec3 dir = points_[q] - points_[p];
                std::sort(on_edge.begin(), on_edge.end(), [&](int x, int y) {
                    return (points_[x] - points_[p]).dot(dir) < (points_[y] - points_[p]).dot(dir);
                });
                for (int x : on_edge)
                    boundary.push_back(local_id(x));
            }
            std::vector<std::pair<int, int>> segs;
            for (const auto &[x, y] : seg_it->second)
                segs.emplace_back(local_id(x), local_id(y));

            // Project along the dominant normal axis, keeping orientation.
            const Vec3 &n = normals_[f];
            int axis = 0;
            n.cwiseAbs().maxCoeff(&axis);
            const int u = (axis + 1) % 3, v = (axis + 2) % 3;
            const double flip = n[axis] < 0.0 ? -1.0 : 1.0;
            std::vector<Vec2> pts;
            for (int g : global)
                pts.emplace_back(points_[g][u], flip * points_[g][v]);

            const auto tris = triangulate_face(pts, boundary, segs);
            double area = 0.0;
            for (const auto &t : tris) {
                pieces.push_back({global[t[0]], global[t[1]], global[t[2]]});
                owner.push_back(f);
                area += triangle_area(points_[global[t[0]]], points_[global[t[1]]], points_[global[t[2]]]);
            }
            const auto tri = std::array{points_[face[0]], points_[face[1]], points_[face[2]]};
            const double full = triangle_area(tri[0], tri[1], tri[2]);
            if (std::abs(area - full) > 1e-6 * full + 1e-12)
                throw Degenerate{"fragment area mismatch"};
        }
    }

    TriMesh select(BooleanOp op, const std::vector<Face> &pieces, const std::vector<int> &owner)
    {
        std::unordered_set<std::uint64_t> cut_edges;
        for (const auto &[f, segs] : segments_)
            for (const auto &[x, y] : segs)
                cut_edges.insert(edge_key(x, y));

        // Patches: pieces of one operand connected across uncut edges.
        const std::size_t np = pieces.size();
        UnionFind patches(np);
        std::unordered_map<std::uint64_t, int> first_user;
        for (std::size_t i = 0; i < np; ++i)
            for (int k = 0; k < 3; ++k) {
                const std::uint64_t key = edge_key(pieces[i][k], pieces[i][(k + 1) % 3]);
                if (cut_edges.count(key))
                    continue;
                const auto [it, fresh] = first_user.emplace(key, static_cast<int>(i));
                if (!fresh && in_b(owner[it->second]) == in_b(owner[i]))
                    patches.unite(it->second, static_cast<int>(i));
            }

        std::unordered_map<int, int> representative;
        std::unordered_map<int, double> best_area;
        for (std::size_t i = 0; i < np; ++i) {
            const int root = patches.find(static_cast<int>(i));
            const double area = triangle_area(points_[pieces[i][0]], points_[pieces[i][1]], points_[pieces[i][2]]);
            if (!best_area.count(root) || area > best_area[root]) {
                best_area[root] = area;
                representative[root] = static_cast<int>(i);
            }
        }
        const Bvh bvh_a(a_), bvh_b(b_);
        std::unordered_map<int, bool> inside_other;
        for (const auto &[root, piece] : representative) {
            const Face &f = pieces[piece];
            const Vec3 c = (points_[f[0]] + points_[f[1]] + points_[f[2]]) / 3.0;
            inside_other[root] = in_b(owner[piece]) ? bvh_a.contains(c) : bvh_b.contains(c);
        }

        std::vector<Face> kept;
        for (std::size_t i = 0; i < np; ++i) {
            const bool from_b = in_b(owner[i]);
            const bool inside = inside_other[patches.find(static_cast<int>(i))];
            Face f = pieces[i];
            bool keep = false, reverse = false;
            switch (op) {
            case BooleanOp::Union:
                keep = !inside;
                break;
            case BooleanOp::Intersection:
                keep = inside;
                break;
            case BooleanOp::Difference:
                keep = from_b ? inside : !inside;
                reverse = from_b;
                break;
            }
            if (!keep)
                continue;
            if (reverse)
                std::swap(f[1], f[2]);
            kept.push_back(f);
        }
        if (kept.empty())
            return {};

        std::vector<int> remap(points_.size(), -1);
        std::vector<Vec3> verts;
        for (Face &f : kept)
            for (int &v : f) {
                if (remap[v] < 0) {
                    remap[v] = static_cast<int>(verts.size());
                    verts.push_back(points_[v]);
                }
                v = remap[v];
            }
        remove_slivers(verts, kept, eps_);
        TriMesh out(std::move(verts), std::move(kept));
        if (!out.is_watertight())
            throw Degenerate{"non-watertight result"};
        return out;
    }

    const TriMesh &a_, &b_;
    int va_ = 0, fa_ = 0;
    double eps_ = 1e-10;
    std::vector<Vec3> points_;
    std::vector<Face> faces_;
    std::vector<Vec3> normals_;
    std::vector<double> offsets_;
    std::unordered_map<std::pair<std::uint64_t, int>, int, PairHash> pierce_cache_;
    std::unordered_map<std::uint64_t, std::vector<int>> edge_points_;
    std::unordered_map<int, std::vector<std::pair<int, int>>> segments_;
};

TriMesh perturbed(const TriMesh &m, int attempt)
{
    // 1e-5, 1e-4, 1e-3 mm: far below print resolution, far above rounding.
    const double scale = std::pow(10.0, attempt - 6);
    const Vec3 axis = Vec3(0.267, 0.535, 0.802).normalized();
    const Vec3 c = m.bounds().center();
    const double radius = std::max(1.0, 0.5 * m.bounds().extent().norm());
    Eigen::Isometry3d xf = Eigen::Isometry3d::Identity();
    xf.translate(c + scale * Vec3(0.73, -0.41, 0.59));
    xf.rotate(Eigen::AngleAxisd(scale / radius, axis));
    xf.translate(-c);
    return m.transformed(xf);
}

} // namespace

TriMesh boolean(const TriMesh &a, const TriMesh &b, BooleanOp op)
{
    if (!a.is_closed() || !b.is_closed())
        throw Error(ErrorCode::BooleanFailure, "boolean operands must be closed meshes without degenerate faces");
    if (!a.bounds().overlaps(b.bounds())) {
        switch (op) {
        case BooleanOp::Union: {
            const TriMesh parts[] = {a, b};
            return concatenate(parts);
        }
        case BooleanOp::Intersection:
            return {};
        case BooleanOp::Difference:
            return a;
        }
    }
    constexpr int kAttempts = 4;
    const char *reason = "";
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        try {
            if (attempt == 0)
                return BooleanSolver(a, b).run(op);
            const TriMesh moved = perturbed(b, attempt);
            return BooleanSolver(a, moved).run(op);
        } catch (const Degenerate &d) {
            reason = d.reason;
        }
    }
    throw Error(ErrorCode::BooleanFailure,
                std::string("could not resolve the intersection curves of the operands: ") + reason);
}

} // namespace magneto
