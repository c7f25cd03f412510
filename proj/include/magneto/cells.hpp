#pragma once

#include "magneto/bvh.hpp"
#include "magneto/config.hpp"
#include "magneto/execution.hpp"
#include "magneto/shell.hpp"

#include <string_view>
#include <utility>
#include <vector>

namespace magneto {

enum class CellStatus { Ok, Shrunk, Overlapping, BooleanFailed, ProjectionMiss };

std::string_view to_string(CellStatus status);

struct Placement {
    Vec3 center;
    Vec3 normal;
};

struct Cell {
    int id = 0;
    Vec3 center = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    CellStatus status = CellStatus::Ok;
    // Cross-section size actually lofted (smaller than the spec once shrunk).
    double cross_section = 0.0;
    // Inner polygon scale relative to the outer one (1 for prisms).
    double perspective_ratio = 1.0;
    std::vector<Vec3> outer;
    std::vector<Vec3> inner;
    TriMesh solid;
    double volume = 0.0;

    // Cells that become cavities of the printable solid.
    bool active() const { return status == CellStatus::Ok || status == CellStatus::Shrunk; }
};

// Acceleration structures over the two surfaces bounding the cell layer.
// Keeps references into `shell`, which must outlive it.
class ShellIndex {
public:
    explicit ShellIndex(const ShellModel &shell);

    const ShellModel &shell() const { return *shell_; }
    const Bvh &outer() const { return outer_; }
    const Bvh &inner() const { return inner_; }

private:
    const ShellModel *shell_;
    Bvh outer_;
    Bvh inner_;
};

// Cell centers: vertices of M' remeshed at the cell pitch with their vertex
// normals. On single-sided shells, centers whose cell would overhang the
// sheet boundary are dropped. Throws EmptyPlacement when nothing fits and
// propagates RemeshDiverged.
std::vector<Placement> place_cells(const ShellModel &shell, const CellSpec &spec, const PrinterProfile &profile = {});

// Circumradius of the lofted cross-section polygon.
double polygon_circumradius(CellShape shape, double cross_section);
int polygon_sides(CellShape shape);

// Lofts one truncated prism/pyramid between M' and the inner body surface.
// `cross_section` overrides the spec size (used when shrinking). Throws
// ProjectionMiss when the normal ray does not reach the inner surface.
Cell loft_cell(int id, const Placement &at, const CellSpec &spec, const ShellIndex &index,
               double cross_section = 0.0);

// Lofts every placement; misses become ProjectionMiss cells without a solid.
std::vector<Cell> loft_cells(const std::vector<Placement> &placements, const CellSpec &spec, const ShellIndex &index,
                             Execution exec = Execution::Parallel);

// Pairs (i < j, indices into `cells`) of active cells closer than `wall`.
std::vector<std::pair<int, int>> conflicting_pairs(const std::vector<Cell> &cells, double wall,
                                                   Execution exec = Execution::Parallel);

struct OverlapSummary {
    std::size_t initial_pairs = 0;        // pairs closer than the wall before resolution
    std::size_t initial_intersecting = 0; // of which actually intersecting
    std::size_t cells_intersecting = 0;   // cells in an initially intersecting pair
    int rounds = 0;
};

inline constexpr double kShrinkFactor = 0.9;
inline constexpr int kMaxShrinkRounds = 5;

// Shrinks conflicting cells by 0.9 per round (at most 5 rounds) until every
// pair is separated by at least the extrusion width. A cell stops shrinking
// at the inscribed-diameter floor; each pair still in conflict afterwards
// loses its smaller (then higher-id) member, marked `Overlapping`.
OverlapSummary resolve_overlaps(std::vector<Cell> &cells, const CellSpec &spec, const ShellIndex &index,
                                const PrinterProfile &profile = {}, Execution exec = Execution::Parallel);

struct CellReport {
    std::size_t ok = 0;
    std::size_t shrunk = 0;
    std::size_t overlapping = 0;
    std::size_t boolean_failed = 0;
    std::size_t projection_miss = 0;

    std::size_t total() const { return ok + shrunk + overlapping + boolean_failed + projection_miss; }
    // Cells that will not hold liquid: excluded overlaps plus blank regions.
    std::size_t flagged() const { return overlapping + boolean_failed + projection_miss; }
};

CellReport tally(const std::vector<Cell> &cells);

struct DisplayModel {
    ShellModel shell;
    std::vector<Cell> cells;
    TriMesh printable;
    CellReport report;
    OverlapSummary overlaps;
    Warnings warnings;
};

// S_out ∪ S_in ∪ (body − active cells). Cells lying strictly inside the
// shell become cavities directly; cells crossing its surface are subtracted
// with a boolean, and a failed subtraction marks the cell BooleanFailed.
// Throws BooleanFailure only if the final solid is not closed.
DisplayModel assemble(ShellModel shell, std::vector<Cell> cells, Execution exec = Execution::Parallel);

// Shell, placement, lofting and overlap resolution; with `preview_only` the
// printable solid is left empty and no boolean runs.
DisplayModel generate_display(const TriMesh &mesh, const CellSpec &spec, const PrinterProfile &profile,
                              ShellMode mode = ShellMode::Auto, bool preview_only = false,
                              Execution exec = Execution::Parallel);

// [{id, center, normal, status, volume_mm3}]
Json cells_json(const std::vector<Cell> &cells);
Json to_json(const CellReport &report);

} // namespace magneto
