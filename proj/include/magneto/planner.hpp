#pragma once

#include "magneto/cells.hpp"
#include "magneto/config.hpp"
#include "magneto/mesh_ops.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace magneto {

struct Circle2 {
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
};

// Pole of inaccessibility: quadtree refinement over the bounding square,
// best-first by the distance bound, until no cell can improve the best
// radius by more than `precision` (mm). Loops follow the even-odd rule, so
// holes are honoured. Ties go to the first maximiser in traversal order.
Circle2 largest_inscribed_circle(const std::vector<Loop> &loops, double precision = 0.01);
inline Circle2 largest_inscribed_circle(const PlanarSection &section, double precision = 0.01)
{
    return largest_inscribed_circle(section.loops, precision);
}

struct InjectionPoint {
    int cell_id = 0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    int layer_index = 0;
    double fill_volume = 0.0;
    double inscribed_diameter = 0.0;

    bool operator==(const InjectionPoint &) const = default;
};

enum class UnplannableReason { NoOpening };

std::string_view to_string(UnplannableReason reason);

struct Unplannable {
    int cell_id = 0;
    UnplannableReason reason = UnplannableReason::NoOpening;

    bool operator==(const Unplannable &) const = default;
};

struct PlanOutcome {
    std::optional<InjectionPoint> point;
    std::optional<Unplannable> unplannable;
};

// Layer plane k sits at z = (k + 1) * layer_height; layer_index is k.
int layer_index_at(double z, double layer_height);

// Walks the layer planes below the cell top downwards and returns the first
// one whose largest inscribed circle is wider than the injector nozzle (plus
// clearance), or NoOpening once the volume below the plane drops under
// fill_fraction of the cell.
PlanOutcome plan_cell(const Cell &cell, const PrinterProfile &profile);

struct InjectionPlan {
    std::vector<InjectionPoint> points; // ascending z, then cell id
    std::vector<Unplannable> unplannable;
    double total_volume = 0.0;
    std::vector<std::string> warnings;

    bool operator==(const InjectionPlan &) const = default;
};

InjectionPlan build_plan(const std::vector<Cell> &cells, const PrinterProfile &profile,
                         Execution exec = Execution::Parallel);
inline InjectionPlan build_plan(const DisplayModel &model, const PrinterProfile &profile,
                                Execution exec = Execution::Parallel)
{
    return build_plan(model.cells, profile, exec);
}

// {points: [...], unplannable: [...], total_volume_mm3, warnings}
Json to_json(const InjectionPlan &plan);
InjectionPlan plan_from_json(const Json &j);

} // namespace magneto
