#include "magneto/planner.hpp"

#include "magneto/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace magneto {

namespace {

// Signed distance to the loop boundaries, positive inside (even-odd).
double signed_distance(const std::vector<Loop> &loops, const Vec2 &p)
{
    bool inside = false;
    double best = std::numeric_limits<double>::infinity();
    for (const Loop &loop : loops) {
        const std::size_t n = loop.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2 &a = loop[i], &b = loop[j];
            if ((a.y() > p.y()) != (b.y() > p.y()) &&
                p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
                inside = !inside;
            const Vec2 ab = b - a;
            const double len2 = ab.squaredNorm();
            const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
            best = std::min(best, (a + t * ab - p).squaredNorm());
        }
    }
    const double d = std::sqrt(best);
    return inside ? d : -d;
}

struct QuadCell {
    Vec2 center;
    double half;
    double distance;
    double bound; // best distance any point of the cell could reach
    std::size_t order;
};

struct ByBound {
    bool operator()(const QuadCell &a, const QuadCell &b) const
    {
        if (a.bound != b.bound)
            return a.bound < b.bound;
        return a.order > b.order;
    }
};

} // namespace

Circle2 largest_inscribed_circle(const std::vector<Loop> &loops, double precision)
{
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    for (const Loop &loop : loops)
        for (const Vec2 &p : loop) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
    if (loops.empty() || !(lo.array() <= hi.array()).all())
        return {};
    std::size_t order = 0;
    const auto make = [&](const Vec2 &c, double half) {
        const double d = signed_distance(loops, c);
        return QuadCell{c, half, d, d + half * std::sqrt(2.0), order++};
    };

    // Start from the area centroid of the largest loop when it is inside.
    QuadCell best = make(0.5 * (lo + hi), 0.0);
    {
        const Loop *outer = &loops.front();
        for (const Loop &l : loops)
            if (std::abs(signed_area(l)) > std::abs(signed_area(*outer)))
                outer = &l;
        Vec2 c = Vec2::Zero();
        double area = 0.0;
        for (std::size_t i = 0, j = outer->size() - 1; i < outer->size(); j = i++) {
            const double w = cross2((*outer)[j], (*outer)[i]);
            c += w * ((*outer)[j] + (*outer)[i]);
            area += w;
        }
        if (std::abs(area) > 0.0) {
            const QuadCell centroid = make(c / (3.0 * area), 0.0);
            if (centroid.distance > best.distance)
                best = centroid;
        }
    }

    const double size = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    std::priority_queue<QuadCell, std::vector<QuadCell>, ByBound> queue;
    const double half0 = 0.5 * size;
    queue.push(make(0.5 * (lo + hi), half0));
    while (!queue.empty()) {
        const QuadCell cell = queue.top();
        queue.pop();
        if (cell.distance > best.distance)
            best = cell;
        if (cell.bound - best.distance <= precision)
            break; // the queue is ordered by bound, nothing left can win
        const double h = 0.5 * cell.half;
        if (h < 0.25 * precision)
            continue;
        for (const Vec2 &d : {Vec2(-h, -h), Vec2(h, -h), Vec2(-h, h), Vec2(h, h)})
            queue.push(make(cell.center + d, h));
    }
    return {best.center, std::max(best.distance, 0.0)};
}

std::string_view to_string(UnplannableReason reason)
{
    switch (reason) {
    case UnplannableReason::NoOpening: return "NoOpening";
    }
    return "Unknown";
}

int layer_index_at(double z, double layer_height)
{
    return static_cast<int>(std::lround(z / layer_height)) - 1;
}

PlanOutcome plan_cell(const Cell &cell, const PrinterProfile &profile)
{
    const double h = profile.layer_height;
    const double total = volume(cell.solid);
    const double top = cell.solid.bounds().hi.z();
    const double opening = profile.injector_nozzle_diameter + profile.injection_clearance;
    // Highest layer plane strictly below the top.
    int k = static_cast<int>(std::floor((top - 1e-6) / h)) - 1;
    for (;; --k) {
        const double z = (k + 1) * h;
        const double below = partial_volume_below(cell.solid, z);
        if (k < 0 || below < profile.fill_fraction * total)
            return {std::nullopt, Unplannable{cell.id, UnplannableReason::NoOpening}};
        const Circle2 circle = largest_inscribed_circle(slice_at(cell.solid, z));
        if (2.0 * circle.radius > opening)
            return {InjectionPoint{cell.id, circle.center.x(), circle.center.y(), z, k, below, 2.0 * circle.radius},
                    std::nullopt};
    }
}

InjectionPlan build_plan(const std::vector<Cell> &cells, const PrinterProfile &profile, Execution exec)
{
    std::vector<PlanOutcome> outcomes(cells.size());
    for_each_index(exec, cells.size(), [&](std::size_t i) {
        if (cells[i].active())
            outcomes[i] = plan_cell(cells[i], profile);
    });
    InjectionPlan plan;
    for (const PlanOutcome &o : outcomes) {
        if (o.point) {
            plan.points.push_back(*o.point);
            plan.total_volume += o.point->fill_volume;
        } else if (o.unplannable) {
            plan.unplannable.push_back(*o.unplannable);
        }
    }
    std::stable_sort(plan.points.begin(), plan.points.end(), [](const InjectionPoint &a, const InjectionPoint &b) {
        return a.layer_index != b.layer_index ? a.layer_index < b.layer_index : a.cell_id < b.cell_id;
    });
    if (!plan.unplannable.empty())
        plan.warnings.push_back(std::to_string(plan.unplannable.size()) +
                                " cells have no injection opening and will print dry");
    if (plan.total_volume > profile.syringe_capacity)
        plan.warnings.push_back("total liquid " + std::to_string(plan.total_volume) +
                                " mm^3 exceeds the syringe capacity of " + std::to_string(profile.syringe_capacity) +
                                " mm^3");
    return plan;
}

Json to_json(const InjectionPlan &plan)
{
    Json points = Json::array(), unplannable = Json::array();
    for (const InjectionPoint &p : plan.points)
        points.push_back({{"cell_id", p.cell_id},
                          {"x", p.x},
                          {"y", p.y},
                          {"z", p.z},
                          {"layer_index", p.layer_index},
                          {"fill_volume_mm3", p.fill_volume},
                          {"inscribed_diameter_mm", p.inscribed_diameter}});
    for (const Unplannable &u : plan.unplannable)
        unplannable.push_back({{"cell_id", u.cell_id}, {"reason", to_string(u.reason)}});
    return {{"points", points},
            {"unplannable", unplannable},
            {"total_volume_mm3", plan.total_volume},
            {"warnings", plan.warnings}};
}

InjectionPlan plan_from_json(const Json &j)
{
    try {
        InjectionPlan plan;
        for (const Json &p : j.at("points"))
            plan.points.push_back({p.at("cell_id").get<int>(), p.at("x").get<double>(), p.at("y").get<double>(),
                                   p.at("z").get<double>(), p.at("layer_index").get<int>(),
                                   p.at("fill_volume_mm3").get<double>(),
                                   p.at("inscribed_diameter_mm").get<double>()});
        for (const Json &u : j.at("unplannable")) {
            if (u.at("reason").get<std::string>() != "NoOpening")
                throw Error(ErrorCode::ParseError, "unknown unplannable reason");
            plan.unplannable.push_back({u.at("cell_id").get<int>(), UnplannableReason::NoOpening});
        }
        plan.total_volume = j.at("total_volume_mm3").get<double>();
        if (j.contains("warnings"))
            plan.warnings = j.at("warnings").get<std::vector<std::string>>();
        return plan;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::ParseError, std::string("malformed plan: ") + e.what());
    }
}

} // namespace magneto
