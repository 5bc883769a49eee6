#include "bandrec/fem.hpp"
#include "bandrec/harness.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace bandrec;

namespace {

FeketeTable& table() {
    static FeketeTable t;
    return t;
}

const Triangle2 kIBZ{{0.0, 0.0}, {M_PI, 0.0}, {M_PI, M_PI}};

void BM_RefineLoop(benchmark::State& state) {
    auto line = make_crossing_line_provider(1.0, 1.0);
    AdaptConfig cfg;
    cfg.L = 2;
    cfg.nMax = static_cast<int>(state.range(0));
    for (auto _ : state) {
        const AdaptResult res = adapt_mesh(*line, cfg);
        benchmark::DoNotOptimize(res.mesh.element_count());
    }
}
BENCHMARK(BM_RefineLoop)->Arg(6)->Arg(8);

void BM_LocalPi(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const DegreeSignature sig{m, {m, m, m}};
    auto f = [](RefPoint z) { return std::sin(z.x) * std::cos(z.y); };
    (void)table().get(std::max(3, m));
    for (auto _ : state) {
        const LocalInterpolant q = local_pi(f, sig, table());
        benchmark::DoNotOptimize(q.nodalCoeffs[0]);
    }
}
BENCHMARK(BM_LocalPi)->Arg(2)->Arg(4)->Arg(6)->Arg(8);

void BM_GlobalEvaluate(benchmark::State& state) {
    auto cone = make_conical_provider(6.0, {2.0, 1.0});
    AdaptConfig cfg;
    cfg.L = 2;
    cfg.nMax = 8;
    const HpResult run = run_hp(*cone, cfg, table());
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto _ : state) {
        double a = u(rng), b = u(rng);
        if (a < b) std::swap(a, b);
        benchmark::DoNotOptimize(run.bands[0].evaluate({M_PI * a, M_PI * b}));
    }
}
BENCHMARK(BM_GlobalEvaluate);

void BM_FemAssemble(benchmark::State& state) {
    UnitCellConfig cell;
    cell.cellMeshN = static_cast<int>(state.range(0));
    const UnitCellDiscretization disc(cell);
    for (auto _ : state) {
        const AssembledSystem sys = assemble(disc, {0.7, 0.3});
        benchmark::DoNotOptimize(sys.A(0, 0));
    }
}
BENCHMARK(BM_FemAssemble)->Arg(16)->Arg(32);

void BM_FemSolve(benchmark::State& state) {
    UnitCellConfig cell;
    cell.cellMeshN = static_cast<int>(state.range(0));
    const UnitCellDiscretization disc(cell);
    for (auto _ : state) {
        const auto pairs = solve_bands(disc, {0.7, 0.3}, 6);
        benchmark::DoNotOptimize(pairs[0].lambda);
    }
}
BENCHMARK(BM_FemSolve)->Arg(12)->Arg(16);

void BM_ErrorReport(benchmark::State& state) {
    auto cone = make_conical_provider(6.0, {2.0, 1.0});
    AdaptConfig cfg;
    cfg.L = 2;
    cfg.nMax = 8;
    const HpResult run = run_hp(*cone, cfg, table());
    const ReferenceGrid grid = ReferenceGrid::make(kIBZ, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const ErrorReport rep = error_report(run.bands, *cone, grid, run.N, 1);
        benchmark::DoNotOptimize(rep.errorInf);
    }
}
BENCHMARK(BM_ErrorReport)->Arg(100)->Arg(200);

} // namespace

BENCHMARK_MAIN();
