#include <benchmark/benchmark.h>

#include "stratrand/simlab.hpp"

namespace {

using namespace stratrand;

ScenarioSpec base_scenario(Scheme scheme) {
    ScenarioSpec sc;
    sc.dgp = {SimCase::I, 1.0, 1.0};
    sc.z = {ZVariant::X1_D2};
    sc.scheme.scheme = scheme;
    sc.scheme.alloc = AllocationSpec::from_ratio({1, 1});
    sc.scheme.factor_count = sc.z.factor_count();
    sc.scheme.factor_levels = sc.z.factor_levels();
    sc.n = 500;
    return sc;
}

void BM_assign(benchmark::State& state) {
    const auto scheme = static_cast<Scheme>(state.range(0));
    SchemeConfig cfg = base_scenario(scheme).scheme;
    const ZSpec z{ZVariant::X1_D2};
    const auto strata = z.strata();
    RngStream zs(7, 1);
    Randomizer rnd(cfg, RngStream(7, 2));
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rnd.assign(strata[zs.next_below(strata.size())]));
        ++i;
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(i));
}
BENCHMARK(BM_assign)
    ->Arg(static_cast<int>(Scheme::Simple))
    ->Arg(static_cast<int>(Scheme::PermutedBlock))
    ->Arg(static_cast<int>(Scheme::BiasedCoin))
    ->Arg(static_cast<int>(Scheme::Urn))
    ->Arg(static_cast<int>(Scheme::Minimization));

void BM_replication(benchmark::State& state) {
    ScenarioSpec sc = base_scenario(Scheme::Minimization);
    sc.n = state.range(0);
    std::int64_t rep = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(run_replication(sc, 20260813u, rep++));
    state.SetItemsProcessed(state.iterations() * sc.n);
}
BENCHMARK(BM_replication)->Arg(100)->Arg(500)->Arg(5000);

void BM_population_variances(benchmark::State& state) {
    const DGPSpec dgp{SimCase::III, 1.0, 1.0};
    const ZSpec z{ZVariant::X1_D4};
    const auto alloc = AllocationSpec::from_ratio({1, 2});
    std::uint64_t seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            population_variances(dgp, z, alloc, ContrastSpec{2, 1}, state.range(0), seed++));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_population_variances)->Arg(100000)->Arg(1000000);

} // namespace

BENCHMARK_MAIN();
