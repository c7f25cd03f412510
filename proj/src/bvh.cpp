#include "magneto/bvh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

namespace magneto {

namespace {

constexpr int kLeafSize = 4;

// Directions used for parity rays; irrational-ish components make it
// unlikely that axis-aligned fixtures are grazed.
const std::array<Vec3, 6> kRayDirections = {
    Vec3(0.5773502691896258, 0.5773502691896258, 0.5773502691896258).normalized(),
    Vec3(0.2718281828, 0.3141592653, 0.9092974268).normalized(),
    Vec3(-0.7071067811, 0.1234567891, 0.6964321).normalized(),
    Vec3(0.1111111, -0.9876543, 0.1618034).normalized(),
    Vec3(-0.4142135, -0.3819660, -0.8263).normalized(),
    Vec3(0.9238795, 0.3826834, -0.0174524).normalized(),
};

bool grazing(const RayHit &h)
{
    constexpr double eps = 1e-9;
    return h.u < eps || h.v < eps || 1.0 - h.u - h.v < eps;
}

} // namespace

Bvh::Bvh(const TriMesh &mesh) : mesh_(&mesh)
{
    const std::size_t n = mesh.face_count();
    face_boxes_.resize(n);
    centroids_.resize(n);
    order_.resize(n);
    for (std::size_t f = 0; f < n; ++f) {
        const auto [a, b, c] = mesh.triangle(f);
        face_boxes_[f] = triangle_box(a, b, c);
        centroids_[f] = (a + b + c) / 3.0;
        order_[f] = static_cast<int>(f);
    }
    nodes_.reserve(2 * n / kLeafSize + 2);
    if (n > 0)
        build(0, static_cast<int>(n));
}

int Bvh::build(int begin, int end)
{
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Aabb box, cbox;
    for (int i = begin; i < end; ++i) {
        box.extend(face_boxes_[order_[i]]);
        cbox.extend(centroids_[order_[i]]);
    }
    nodes_[index].box = box;
    if (end - begin <= kLeafSize) {
        nodes_[index].begin = begin;
        nodes_[index].end = end;
        return index;
    }
    int axis = 0;
    cbox.extent().maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
        const double ca = centroids_[a][axis], cb = centroids_[b][axis];
        return ca != cb ? ca < cb : a < b;
    });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

ClosestPoint Bvh::closest(const Vec3 &p) const
{
    ClosestPoint best{p, -1, std::numeric_limits<double>::infinity()};
    if (nodes_.empty())
        return best;
    double best2 = std::numeric_limits<double>::infinity();
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    queue.emplace(nodes_[0].box.squared_distance(p), 0);
    while (!queue.empty()) {
        const auto [d2, ni] = queue.top();
        queue.pop();
        if (d2 > best2)
            break;
        const Node &node = nodes_[ni];
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int f = order_[i];
                const auto [a, b, c] = mesh_->triangle(f);
                const Vec3 q = closest_point_on_triangle(p, a, b, c);
                const double e2 = (q - p).squaredNorm();
                if (e2 < best2 || (e2 == best2 && f < best.face)) {
                    best2 = e2;
                    best = {q, f, 0.0};
                }
            }
        } else {
            queue.emplace(nodes_[node.left].box.squared_distance(p), node.left);
            queue.emplace(nodes_[node.right].box.squared_distance(p), node.right);
        }
    }
    best.distance = std::sqrt(best2);
    return best;
}

std::vector<int> Bvh::faces_near(const Vec3 &p, double radius) const
{
    std::vector<int> out;
    if (nodes_.empty())
        return out;
    const double r2 = radius * radius;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const Node &node = nodes_[stack.back()];
        stack.pop_back();
        if (node.box.squared_distance(p) > r2)
            continue;
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int f = order_[i];
                const auto [a, b, c] = mesh_->triangle(f);
                if ((closest_point_on_triangle(p, a, b, c) - p).squaredNorm() <= r2)
                    out.push_back(f);
            }
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> Bvh::faces_overlapping(const Aabb &box) const
{
    std::vector<int> out;
    if (nodes_.empty())
        return out;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const Node &node = nodes_[stack.back()];
        stack.pop_back();
        if (!node.box.overlaps(box))
            continue;
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i)
                if (face_boxes_[order_[i]].overlaps(box))
                    out.push_back(order_[i]);
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Bvh::ray_box(const Aabb &box, const Vec3 &origin, const Vec3 &inv_dir) const
{
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        if (std::isinf(inv_dir[k])) {
            if (origin[k] < box.lo[k] || origin[k] > box.hi[k])
                return false;
            continue;
        }
        double a = (box.lo[k] - origin[k]) * inv_dir[k];
        double b = (box.hi[k] - origin[k]) * inv_dir[k];
        if (a > b)
            std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
        if (t0 > t1 + 1e-12)
            return false;
    }
    return true;
}

std::vector<LineHit> Bvh::line_hits(const Vec3 &origin, const Vec3 &dir) const
{
    std::vector<LineHit> hits;
    if (nodes_.empty())
        return hits;
    const Vec3 inv = dir.cwiseInverse();
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const Node &node = nodes_[stack.back()];
        stack.pop_back();
        if (!ray_box(node.box.inflated(1e-9), origin, inv))
            continue;
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int f = order_[i];
                const auto [a, b, c] = mesh_->triangle(f);
                if (auto h = intersect_line_triangle(origin, dir, a, b, c))
                    hits.push_back({h->t, f, h->u, h->v});
            }
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    std::sort(hits.begin(), hits.end(), [](const LineHit &a, const LineHit &b) {
        return a.t != b.t ? a.t < b.t : a.face < b.face;
    });
    return hits;
}

std::optional<LineHit> Bvh::first_hit(const Vec3 &origin, const Vec3 &dir, double t_min) const
{
    for (const LineHit &h : line_hits(origin, dir))
        if (h.t > t_min)
            return h;
    return std::nullopt;
}

bool Bvh::contains(const Vec3 &p) const
{
    if (!mesh_->bounds().contains(p))
        return false;
    for (const Vec3 &dir : kRayDirections) {
        bool ok = true;
        int crossings = 0;
        for (const LineHit &h : line_hits(p, dir)) {
            if (std::abs(h.t) < 1e-12 || grazing({h.t, h.u, h.v})) {
                ok = false;
                break;
            }
            if (h.t > 0.0)
                ++crossings;
        }
        if (ok)
            return crossings % 2 == 1;
    }
    // Every direction grazed: fall back to the closest face's orientation.
    const ClosestPoint cp = closest(p);
    return (p - cp.point).dot(mesh_->face_normal(static_cast<std::size_t>(cp.face))) < 0.0;
}

Vec3 Bvh::normal_at(const LineHit &hit) const
{
    const Face &f = mesh_->faces()[hit.face];
    const auto &n = mesh_->vertex_normals();
    const Vec3 v = (1.0 - hit.u - hit.v) * n[f[0]] + hit.u * n[f[1]] + hit.v * n[f[2]];
    return v.normalized();
}

bool contains_brute_force(const TriMesh &mesh, const Vec3 &p)
{
    if (!mesh.bounds().contains(p))
        return false;
    for (const Vec3 &dir : kRayDirections) {
        bool ok = true;
        int crossings = 0;
        for (std::size_t f = 0; f < mesh.face_count() && ok; ++f) {
            const auto [a, b, c] = mesh.triangle(f);
            if (auto h = intersect_line_triangle(p, dir, a, b, c)) {
                if (std::abs(h->t) < 1e-12 || grazing(*h))
                    ok = false;
                else if (h->t > 0.0)
                    ++crossings;
            }
        }
        if (ok)
            return crossings % 2 == 1;
    }
    return false;
}

} // namespace magneto
