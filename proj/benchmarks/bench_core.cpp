#include <benchmark/benchmark.h>

#include <cstdio>
#include <numbers>

#include "bmin/flow.hpp"
#include "bmin/numerics.hpp"
#include "bmin/solvers.hpp"
#include "bmin/stability.hpp"

namespace {

using namespace bmin;

geometry1d::GraphCurve reaper_curve(int n) {
    const geometry1d::Grid1D grid(-1.2, 1.2, n);
    return geometry1d::GraphCurve::sampled(grid, geometry1d::grim_reaper);
}

void BM_WeightedLength(benchmark::State& state) {
    const auto c = reaper_curve(static_cast<int>(state.range(0)));
    const auto B = geometry1d::WeightField::curve("y");
    for (auto _ : state) benchmark::DoNotOptimize(geometry1d::weighted_length(c, B));
}
BENCHMARK(BM_WeightedLength)->Arg(200)->Arg(2000);

void BM_ElResidual(benchmark::State& state) {
    const auto c = reaper_curve(static_cast<int>(state.range(0)));
    const auto B = geometry1d::WeightField::curve("y");
    for (auto _ : state) benchmark::DoNotOptimize(geometry1d::el_residual(c, B));
}
BENCHMARK(BM_ElResidual)->Arg(200)->Arg(2000);

void BM_SolveCurveBvp(benchmark::State& state) {
    const geometry1d::Grid1D grid(-1.2, 1.2, static_cast<int>(state.range(0)));
    const auto B = geometry1d::WeightField::curve("y");
    const double yb = geometry1d::grim_reaper(1.2);
    for (auto _ : state) {
        auto [curve, report] = solvers::solve_curve_bvp(grid, yb, yb, B);
        benchmark::DoNotOptimize(report.final_residual);
    }
}
BENCHMARK(BM_SolveCurveBvp)->Arg(100)->Arg(400);

void BM_MinEigenvalue(benchmark::State& state) {
    const stability::SmoczykProblem prob(0.01);
    const auto sys = stability::assemble_sl(prob, static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(stability::min_eigenvalue(sys.A, sys.mass));
}
BENCHMARK(BM_MinEigenvalue)->Arg(2000)->Arg(4000);

void BM_Riccati(benchmark::State& state) {
    const stability::SmoczykProblem prob(0.1);
    const double step = 1e-4;
    for (auto _ : state) {
        auto sol = stability::solve_riccati_v(prob, step);
        benchmark::DoNotOptimize(sol.positive());
    }
}
BENCHMARK(BM_Riccati);

void BM_FlowStep(benchmark::State& state) {
    const auto c = reaper_curve(240);
    const double h = c.grid().h();
    char lb[64], rb[64];
    std::snprintf(lb, sizeof lb, "%.17g+t", geometry1d::grim_reaper(-1.2));
    std::snprintf(rb, sizeof rb, "%.17g+t", geometry1d::grim_reaper(1.2));
    const auto boundary = flow::BoundaryRule::from_strings(lb, rb);
    for (auto _ : state) {
        auto traj = flow::evolve_csf(c, 100.0 * 0.4 * h * h, 0.4 * h * h, boundary, 2);
        benchmark::DoNotOptimize(traj.back().t);
    }
}
BENCHMARK(BM_FlowStep);

}  // namespace

BENCHMARK_MAIN();
