#include <benchmark/benchmark.h>

#include "stm/analysis.hpp"
#include "stm/rng_paths.hpp"
#include "stm/schemes.hpp"

namespace {

void BM_GeneratePaths(benchmark::State& state) {
    const auto steps = static_cast<std::size_t>(state.range(0));
    std::uint64_t path = 0;
    for (auto _ : state) {
        auto b = stm::generate_paths(1, path++, steps, 1, 1.0);
        benchmark::DoNotOptimize(b.increments().data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeneratePaths)->Arg(1 << 10)->Arg(1 << 14);

void BM_Coarsen(benchmark::State& state) {
    const auto fine = stm::generate_paths(1, 0, 1 << 14, 1, 1.0);
    for (auto _ : state) {
        auto c = stm::coarsen(fine, static_cast<std::size_t>(state.range(0)));
        benchmark::DoNotOptimize(c.increments().data());
    }
}
BENCHMARK(BM_Coarsen)->Arg(8)->Arg(256);

void BM_Integrate(benchmark::State& state) {
    const auto kind = static_cast<stm::SchemeKind>(state.range(0));
    const auto problem = stm::builtin_problem("ginzburg-landau-unstable");
    const auto bundle = stm::generate_paths(3, 0, 1 << 12, 1, 1.0);
    for (auto _ : state) {
        auto traj = stm::integrate(problem, kind, bundle, false);
        benchmark::DoNotOptimize(traj.states.data());
    }
    state.SetItemsProcessed(state.iterations() * (1 << 12));
    state.SetLabel(std::string(stm::scheme_name(kind)));
}
BENCHMARK(BM_Integrate)->DenseRange(0, 4);

// Cost per path of reaching a fixed accuracy: semi-tamed Milstein at N = 2^11
// versus semi-tamed Euler at N = 2^16 on the unstable Ginzburg-Landau model.
void BM_StepsToPrecision(benchmark::State& state) {
    const auto kind = static_cast<stm::SchemeKind>(state.range(0));
    const auto steps = static_cast<std::size_t>(state.range(1));
    const auto problem = stm::builtin_problem("ginzburg-landau-unstable");
    std::uint64_t path = 0;
    for (auto _ : state) {
        const auto bundle = stm::generate_paths(5, path++, steps, 1, 1.0);
        auto traj = stm::integrate(problem, kind, bundle, false);
        benchmark::DoNotOptimize(traj.states.data());
    }
    state.SetLabel(std::string(stm::scheme_name(kind)));
}
BENCHMARK(BM_StepsToPrecision)
    ->Args({static_cast<int>(stm::SchemeKind::semi_tamed_milstein), 1 << 11})
    ->Args({static_cast<int>(stm::SchemeKind::semi_tamed_euler), 1 << 16});

}  // namespace

BENCHMARK_MAIN();
