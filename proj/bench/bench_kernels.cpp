#include "magneto/cells.hpp"
#include "magneto/planner.hpp"
#include "support/fixtures.hpp"

#include <benchmark/benchmark.h>

using namespace magneto;

namespace {

// Shared blob display: 500-600 hexagonal cells on a closed, bumpy surface.
struct Scene {
    CellSpec spec{CellShape::Hexagon, 4.0, 1.0, 5.0, 0.6};
    PrinterProfile profile;
    ShellModel shell = build_shell(fixtures::bunny_class_blob(22), spec, profile);
    std::vector<Placement> placements = place_cells(shell, spec, profile);
    std::vector<Cell> cells;

    Scene()
    {
        const ShellIndex index(shell);
        cells = loft_cells(placements, spec, index);
        resolve_overlaps(cells, spec, index, profile);
    }
};

const Scene &scene()
{
    static const Scene s;
    return s;
}

Execution exec_of(const benchmark::State &state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

void BM_LoftCells(benchmark::State &state)
{
    const Scene &s = scene();
    const ShellIndex index(s.shell);
    for (auto _ : state)
        benchmark::DoNotOptimize(loft_cells(s.placements, s.spec, index, exec_of(state)));
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * s.placements.size()));
}

void BM_ConflictingPairs(benchmark::State &state)
{
    const Scene &s = scene();
    for (auto _ : state)
        benchmark::DoNotOptimize(conflicting_pairs(s.cells, s.spec.gap, exec_of(state)));
}

void BM_BuildPlan(benchmark::State &state)
{
    const Scene &s = scene();
    for (auto _ : state)
        benchmark::DoNotOptimize(build_plan(s.cells, s.profile, exec_of(state)));
}

void BM_Assemble(benchmark::State &state)
{
    const Scene &s = scene();
    for (auto _ : state)
        benchmark::DoNotOptimize(assemble(s.shell, s.cells, exec_of(state)));
}

void BM_GenerateDisplay(benchmark::State &state)
{
    const TriMesh mesh = fixtures::bunny_class_blob(22);
    const Scene &s = scene();
    for (auto _ : state)
        benchmark::DoNotOptimize(generate_display(mesh, s.spec, s.profile, ShellMode::Auto, false, exec_of(state)));
}

} // namespace

// Argument 0 runs the serial reference, 1 the OpenMP kernel.
BENCHMARK(BM_LoftCells)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ConflictingPairs)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BuildPlan)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Assemble)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GenerateDisplay)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
