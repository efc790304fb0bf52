#include <random>

#include <benchmark/benchmark.h>

#include "test_support.hpp"

#include "gearopt/optimizer.hpp"
#include "gearopt/sizing.hpp"

using namespace gearopt;

namespace {

const testing::Pipeline& pipeline()
{
    return testing::Pipeline::get();
}

void BM_GearshiftDp(benchmark::State& state)
{
    std::mt19937_64 rng(1);
    auto c = testing::random_steps(rng, static_cast<std::size_t>(state.range(0)));
    for (std::size_t t = 0; t < c.size(); ++t) {
        c.gamma_min[t] = 0.5;
        c.gamma_max[t] = 40.0;
    }
    const std::vector<double> ratios{4.0, 7.0, 10.0, 14.0, 19.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(gearshift_dp(ratios, c, 300.0));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GearshiftDp)->Arg(200)->Arg(1800);

void BM_OptimizeMgt(benchmark::State& state)
{
    const auto& pl = pipeline();
    const int n = static_cast<int>(state.range(0));
    const auto prob = build_problem(pl.cycle, pl.params, TransmissionSpec::mgt(n), pl.fractional, 0.45);
    MgtOptions mo;
    mo.multi_start = state.range(1) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimize_mgt(n, prob.coeffs, 300.0, prob.towing_floor, mo));
    }
}
BENCHMARK(BM_OptimizeMgt)->Args({2, 0})->Args({2, 1})->Args({5, 0})->Args({5, 1})->Unit(benchmark::kMillisecond);

void BM_SizeSweep(benchmark::State& state)
{
    const auto& pl = pipeline();
    DesignOptions opt;
    opt.c_shift = 300.0;
    const auto spec = TransmissionSpec::mgt(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(size_sweep(spec, pl.fractional, 0.3, 1.2, 100, pl.cycle, pl.params, opt));
    }
}
BENCHMARK(BM_SizeSweep)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_FitFractional(benchmark::State& state)
{
    const auto& pl = pipeline();
    const auto grid = uniform_power_grid(pl.map.limits().P_max, 101);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_fractional(pl.map, grid));
    }
}
BENCHMARK(BM_FitFractional)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
