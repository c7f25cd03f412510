#include "magneto/cells.hpp"
#include "magneto/error.hpp"
#include "magneto/primitives.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace magneto;

namespace {

CellSpec square3() { return {CellShape::Square, 3.0, 1.0, 5.0, 0.6}; }
CellSpec hex4() { return {CellShape::Hexagon, 4.0, 1.0, 5.0, 0.6}; }

ErrorCode code_of(auto &&fn)
{
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

// Plate shell: sheet at z = 0, display surface M' at z = 5.6.
ShellModel plate_shell(double w = 40, double d = 40, const CellSpec &spec = square3())
{
    return build_shell(primitives::sheet(w, d, 4, 4), spec);
}

double cross_section_span(const std::vector<Vec3> &poly)
{
    double best = 0.0;
    for (const Vec3 &a : poly)
        for (const Vec3 &b : poly)
            best = std::max(best, (a - b).norm());
    return best;
}

} // namespace

TEST(LoftCell, PlateCellIsPrism)
{
    const ShellModel shell = plate_shell();
    const ShellIndex index(shell);
    const Cell cell = loft_cell(0, {Vec3(20, 20, 5.6), Vec3::UnitZ()}, square3(), index);
    EXPECT_EQ(cell.perspective_ratio, 1.0);
    EXPECT_TRUE(cell.solid.is_closed());
    EXPECT_NEAR(cell.volume, 45.0, 0.45);
    ASSERT_EQ(cell.outer.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k)
        EXPECT_LT((cell.outer[k] - Vec3(0, 0, 5) - cell.inner[k]).norm(), 1e-9);
    // Axis-aligned square: corners at 20 +- 1.5.
    for (const Vec3 &p : cell.outer) {
        EXPECT_NEAR(std::abs(p.x() - 20.0), 1.5, 1e-9);
        EXPECT_NEAR(std::abs(p.y() - 20.0), 1.5, 1e-9);
    }
}

TEST(LoftCell, HexagonFirstVertexTowardX)
{
    const ShellModel shell = plate_shell();
    const ShellIndex index(shell);
    const Cell cell = loft_cell(0, {Vec3(20, 20, 5.6), Vec3::UnitZ()}, hex4(), index);
    EXPECT_LT((cell.outer[0] - Vec3(22, 20, 5.6)).norm(), 1e-9);
    EXPECT_EQ(cell.outer.size(), 6u);
}

TEST(LoftCell, CircleKeepsNominalArea)
{
    const ShellModel shell = plate_shell();
    const ShellIndex index(shell);
    const Cell cell = loft_cell(0, {Vec3(20, 20, 5.6), Vec3::UnitZ()}, {CellShape::Circle, 4.0, 1.0, 5.0, 0.6}, index);
    EXPECT_EQ(cell.outer.size(), 24u);
    EXPECT_NEAR(cell.volume, std::numbers::pi * 4.0 * 5.0, 1e-6);
}

TEST(LoftCell, SpherePerspectiveMatchesSimilarTriangles)
{
    ShellModel shell;
    shell.m_prime = primitives::icosphere(Vec3::Zero(), 30.0, 40);
    shell.body_inner = primitives::icosphere(Vec3::Zero(), 24.0, 40);
    const ShellIndex index(shell);
    const Vec3 dir = Vec3(0.3, -0.5, 0.8).normalized();
    const Cell cell = loft_cell(0, {30.0 * dir, dir}, {CellShape::Hexagon, 4.0, 1.0, 5.0, 0.6}, index);
    EXPECT_NEAR(cell.perspective_ratio, 0.8, 0.01);
    EXPECT_NEAR(cross_section_span(cell.outer), 4.0, 1e-9);
    EXPECT_NEAR(cross_section_span(cell.inner), 3.2, 0.05);
    EXPECT_TRUE(cell.solid.is_closed());
    // The outer face is sunk so its corners stay on or under M'.
    for (const Vec3 &p : cell.outer)
        EXPECT_LE(p.norm(), 30.0 + 1e-6);
}

TEST(LoftCell, RotationEquivariantAboutX)
{
    const TriMesh m = fixtures::bunny_class_blob(10);
    Eigen::Isometry3d xf = Eigen::Isometry3d::Identity();
    xf.translate(Vec3(3, -7, 11));
    xf.rotate(Eigen::AngleAxisd(0.7, Vec3::UnitX()));
    const ShellModel a = build_shell(m, hex4()), b = build_shell(m.transformed(xf), hex4());
    const ShellIndex ia(a), ib(b);
    for (int v : {0, 37, 151, 402}) {
        const Vec3 c = a.m_prime.vertex(v), n = a.m_prime.vertex_normals()[static_cast<std::size_t>(v)];
        const Cell ca = loft_cell(0, {c, n}, hex4(), ia);
        const Cell cb = loft_cell(0, {xf * c, xf.linear() * n}, hex4(), ib);
        ASSERT_EQ(ca.solid.vertex_count(), cb.solid.vertex_count());
        for (std::size_t i = 0; i < ca.solid.vertex_count(); ++i)
            EXPECT_LT((xf * ca.solid.vertices()[i] - cb.solid.vertices()[i]).norm(), 1e-6);
    }
}

TEST(LoftCell, MissOffTheSheet)
{
    const ShellModel shell = plate_shell();
    const ShellIndex index(shell);
    EXPECT_EQ(code_of([&] { loft_cell(0, {Vec3(60, 20, 5.6), Vec3::UnitZ()}, square3(), index); }),
              ErrorCode::ProjectionMiss);
    const auto cells = loft_cells({{Vec3(60, 20, 5.6), Vec3::UnitZ()}, {Vec3(20, 20, 5.6), Vec3::UnitZ()}}, square3(),
                                  index);
    EXPECT_EQ(cells[0].status, CellStatus::ProjectionMiss);
    EXPECT_EQ(cells[1].status, CellStatus::Ok);
}

TEST(PlaceCells, PlateCountNearLatticeEstimate)
{
    const ShellModel shell = plate_shell();
    const auto centers = place_cells(shell, square3());
    EXPECT_GE(centers.size(), 75u);
    EXPECT_LE(centers.size(), 125u);
    for (const Placement &p : centers) {
        EXPECT_NEAR(p.center.z(), 5.6, 1e-9);
        EXPECT_NEAR(p.normal.z(), 1.0, 1e-9);
        // Whole cell (circumradius + wall) stays on the sheet.
        EXPECT_GE(std::min({p.center.x(), p.center.y(), 40 - p.center.x(), 40 - p.center.y()}), 2.52);
    }
}

TEST(PlaceCells, SphereSpacingNearPitch)
{
    const ShellModel shell = build_shell(primitives::icosphere(Vec3::Zero(), 25.0, 24), hex4());
    const auto centers = place_cells(shell, hex4());
    double sum = 0.0;
    for (const Placement &a : centers) {
        double nearest = 1e300;
        for (const Placement &b : centers)
            if (&a != &b)
                nearest = std::min(nearest, (a.center - b.center).norm());
        sum += nearest;
        EXPECT_NEAR(a.center.norm(), 30.0, 0.2);
    }
    EXPECT_NEAR(sum / centers.size(), 5.0, 1.0);
}

TEST(PlaceCells, PitchLargerThanModel)
{
    EXPECT_EQ(code_of([] { place_cells(plate_shell(5, 5), square3()); }), ErrorCode::EmptyPlacement);
    // Just large enough for one cell.
    const auto one = place_cells(plate_shell(6, 6), square3());
    ASSERT_GE(one.size(), 1u);
    EXPECT_LT((one[0].center - Vec3(3, 3, 5.6)).norm(), 0.5);
    const CellSpec big{CellShape::Hexagon, 7.0, 5.0, 5.0, 0.6};
    const ShellModel tiny = build_shell(primitives::icosphere(Vec3::Zero(), 1.0, 4), big);
    EXPECT_EQ(code_of([&] { place_cells(tiny, big); }), ErrorCode::EmptyPlacement);
}

TEST(ResolveOverlaps, SeparatedPlateCellsUntouched)
{
    const ShellModel shell = plate_shell();
    const ShellIndex index(shell);
    auto cells = loft_cells({{Vec3(10, 20, 5.6), Vec3::UnitZ()}, {Vec3(14, 20, 5.6), Vec3::UnitZ()}}, square3(), index);
    const OverlapSummary s = resolve_overlaps(cells, square3(), index);
    EXPECT_EQ(s.initial_pairs, 0u);
    EXPECT_EQ(s.rounds, 0);
    EXPECT_EQ(cells[0].status, CellStatus::Ok);
    EXPECT_EQ(cells[1].status, CellStatus::Ok);
    EXPECT_EQ(cells[1].cross_section, 3.0);
}

TEST(ResolveOverlaps, TightPairShrinksToWall)
{
    const CellSpec spec{CellShape::Square, 4.0, 1.0, 5.0, 0.6};
    const ShellModel shell = plate_shell(40, 40, spec);
    const ShellIndex index(shell);
    auto cells = loft_cells({{Vec3(10, 20, 5.6), Vec3::UnitZ()}, {Vec3(14.2, 20, 5.6), Vec3::UnitZ()}}, spec, index);
    const OverlapSummary s = resolve_overlaps(cells, spec, index);
    EXPECT_EQ(s.initial_pairs, 1u);
    EXPECT_EQ(s.rounds, 1);
    EXPECT_EQ(cells[0].status, CellStatus::Shrunk);
    EXPECT_NEAR(cells[0].cross_section, 3.6, 1e-12);
    EXPECT_GE(oracle::brute_force_mesh_distance(cells[0].solid, cells[1].solid), 0.4);
}

TEST(ResolveOverlaps, RidgePairEndsDisjointOrExcluded)
{
    // Cells on the two faces of a 90-degree ridge, centers 4.5 mm apart.
    // Beside a real offset ridge the inner surface is out of reach, so the
    // fixture gives each face its own backing slab 5 mm below.
    const CellSpec spec{CellShape::Square, 4.0, 1.0, 5.0, 0.6};
    ShellModel shell;
    shell.m_prime = primitives::box(Vec3(-5, -5, -5), Vec3(45, 45, 25), 4);
    const TriMesh slabs[] = {primitives::box(Vec3(-5, -5, 0), Vec3(45, 45, 20)),
                             primitives::box(Vec3(-5, -5, 0), Vec3(45, 40, 25))};
    shell.body_inner = concatenate(slabs);
    const ShellIndex index(shell);
    const double a = 4.5 / std::sqrt(2.0);
    auto cells = loft_cells({{Vec3(20, 45 - a, 25), Vec3::UnitZ()}, {Vec3(20, 45, 25 - a), Vec3::UnitY()}}, spec, index);
    ASSERT_TRUE(cells[0].active() && cells[1].active());
    EXPECT_EQ(oracle::brute_force_mesh_distance(cells[0].solid, cells[1].solid), 0.0);
    const OverlapSummary s = resolve_overlaps(cells, spec, index);
    EXPECT_EQ(s.initial_intersecting, 1u);
    const bool both = cells[0].active() && cells[1].active();
    if (both)
        EXPECT_GE(oracle::brute_force_mesh_distance(cells[0].solid, cells[1].solid), 0.4);
    else
        EXPECT_TRUE(cells[0].active() || cells[1].active());
    for (const Cell &c : cells)
        if (c.active())
            EXPECT_GE(inscribed_diameter(spec.shape, c.cross_section), 2.5 - 1e-9);
}

TEST(Assemble, SingleCellPlate)
{
    const ShellModel shell = plate_shell();
    const ShellIndex index(shell);
    auto cells = loft_cells({{Vec3(20, 20, 5.6), Vec3::UnitZ()}}, square3(), index);
    const double shells = volume(shell.s_out) + volume(shell.s_in) + volume(shell.body);
    const DisplayModel model = assemble(shell, cells);
    EXPECT_TRUE(model.printable.is_closed());
    EXPECT_NEAR(volume(model.printable), shells - 45.0, 0.01 * (shells - 45.0));
    EXPECT_EQ(model.report.ok, 1u);
}

TEST(Assemble, LatticeOf160Cavities)
{
    const ShellModel shell = plate_shell(68, 44);
    const ShellIndex index(shell);
    std::vector<Placement> at;
    for (int j = 0; j < 10; ++j)
        for (int i = 0; i < 16; ++i)
            at.push_back({Vec3(4.0 + 4.0 * i, 4.0 + 4.0 * j, 5.6), Vec3::UnitZ()});
    auto cells = loft_cells(at, square3(), index);
    EXPECT_EQ(resolve_overlaps(cells, square3(), index).initial_pairs, 0u);
    const DisplayModel model = assemble(shell, cells);
    EXPECT_TRUE(model.printable.is_closed());
    EXPECT_EQ(model.report.ok, 160u);
    // One slab plus 160 spherical cavity boundaries.
    EXPECT_EQ(model.printable.euler_characteristic(), 2 * 161);
    const double solid = volume(shell.s_out) + volume(shell.s_in) + volume(shell.body);
    EXPECT_NEAR(volume(model.printable), solid - 160 * 45.0, 1e-6 * solid);
}

TEST(Assemble, DegenerateSliverIsBooleanFailed)
{
    const ShellModel shell = plate_shell();
    const ShellIndex index(shell);
    auto cells = loft_cells({{Vec3(20, 20, 5.6), Vec3::UnitZ()}, {Vec3(10, 10, 5.6), Vec3::UnitZ()}}, square3(), index);
    // Flatten the second cell onto its outer face.
    Cell &sliver = cells[1];
    sliver.inner = sliver.outer;
    std::vector<Vec3> verts = sliver.outer;
    verts.insert(verts.end(), sliver.outer.begin(), sliver.outer.end());
    sliver.solid = TriMesh(verts, sliver.solid.faces());
    sliver.volume = sliver.solid.signed_volume();
    const DisplayModel model = assemble(shell, cells);
    EXPECT_EQ(cells.size(), model.cells.size());
    EXPECT_EQ(model.cells[1].status, CellStatus::BooleanFailed);
    EXPECT_EQ(model.cells[0].status, CellStatus::Ok);
    EXPECT_EQ(model.report.boolean_failed, 1u);
    EXPECT_TRUE(model.printable.is_closed());
}

TEST(Assemble, CellCrossingTheScreenIsSubtracted)
{
    const ShellModel shell = plate_shell();
    const ShellIndex index(shell);
    auto cells = loft_cells({{Vec3(20, 20, 5.6), Vec3::UnitZ()}}, square3(), index);
    // Lift the cell through the outer screen: 1 mm of it pokes out at the top.
    Cell &c = cells[0];
    c.solid = c.solid.translated(Vec3(0, 0, 1.6));
    const double shells = volume(shell.s_out) + volume(shell.s_in) + volume(shell.body);
    const DisplayModel model = assemble(shell, cells);
    EXPECT_EQ(model.cells[0].status, CellStatus::Ok);
    EXPECT_TRUE(model.printable.is_closed());
    EXPECT_NEAR(volume(model.printable), shells - 9.0 * 4.0, 0.005 * shells);
}

TEST(GenerateDisplay, PlateCountsSumAndCellsDisjoint)
{
    const DisplayModel model = generate_display(primitives::sheet(40, 40, 4, 4), square3(), {});
    const std::size_t centers = place_cells(model.shell, square3()).size();
    EXPECT_EQ(model.report.total(), centers);
    EXPECT_EQ(model.cells.size(), centers);
    EXPECT_TRUE(model.printable.is_closed());
    for (std::size_t i = 0; i < model.cells.size(); ++i)
        for (std::size_t j = i + 1; j < model.cells.size(); ++j)
            if (model.cells[i].active() && model.cells[j].active() &&
                (model.cells[i].center - model.cells[j].center).norm() < 8.0)
                EXPECT_GE(oracle::brute_force_mesh_distance(model.cells[i].solid, model.cells[j].solid), 0.4 - 1e-9);
    const Json j = cells_json(model.cells);
    EXPECT_EQ(j.size(), centers);
    EXPECT_TRUE(j[0].contains("volume_mm3"));
}

TEST(GenerateDisplay, SerialAndParallelAgree)
{
    const TriMesh plate = primitives::sheet(40, 40, 4, 4);
    const DisplayModel a = generate_display(plate, square3(), {}, ShellMode::Auto, false, Execution::Serial);
    const DisplayModel b = generate_display(plate, square3(), {}, ShellMode::Auto, false, Execution::Parallel);
    EXPECT_EQ(a.printable.vertices(), b.printable.vertices());
    EXPECT_EQ(a.printable.faces(), b.printable.faces());
}

TEST(GenerateDisplay, PreviewOnlySkipsAssembly)
{
    const DisplayModel model =
        generate_display(primitives::sheet(40, 40, 4, 4), square3(), {}, ShellMode::Auto, true);
    EXPECT_TRUE(model.printable.empty());
    EXPECT_GT(model.report.total(), 0u);
}

TEST(ResolveOverlaps, BunnyClassFewIntersectionsBeforeResolution)
{
    const TriMesh blob = fixtures::bunny_class_blob();
    std::vector<Vec3> half;
    for (const Vec3 &p : blob.vertices())
        half.push_back(0.5 * p);
    const TriMesh m(half, blob.faces());
    const DisplayModel model = generate_display(m, hex4(), {}, ShellMode::Auto, true);
    const std::size_t n = model.cells.size();
    EXPECT_GE(n, 140u);
    EXPECT_LE(n, 230u);
    EXPECT_LE(model.overlaps.cells_intersecting, n * 4 / 100) << n;
}
