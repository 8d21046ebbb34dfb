// Serial vs OpenMP kernels. With one core the OpenMP numbers only show overhead.
#include <benchmark/benchmark.h>

#include "aoi/optimizer.hpp"
#include "aoi/parallel.hpp"
#include "aoi/simulator.hpp"

namespace {

const std::vector<aoi::HopTemplate>& two_hops()
{
    static const std::vector<aoi::HopTemplate> hops{aoi::HopTemplate{400, aoi::ShiftedExp(1.0, 1.0)},
                                                    aoi::HopTemplate{400, aoi::ShiftedExp(1.0, 1.0)}};
    return hops;
}

void BM_ExhaustiveSerial(benchmark::State& state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(aoi::optimize_k_exhaustive(two_hops(), aoi::objective::TwoHopUpper{}, false));
    }
}

void BM_ExhaustiveOmp(benchmark::State& state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(aoi::optimize_k_exhaustive(two_hops(), aoi::objective::TwoHopUpper{}, true));
    }
}

aoi::SimConfig sim_config()
{
    aoi::SimConfig cfg;
    cfg.network = aoi::NetworkConfig{{{10, 6, aoi::ShiftedExp(1.0, 1.0)}, {10, 9, aoi::ShiftedExp(1.0, 1.0)}}};
    cfg.cycles = 20000;
    cfg.warmup_cycles = 2000;
    return cfg;
}

void BM_ReplicationsSerial(benchmark::State& state)
{
    const auto cfg = sim_config();
    for (auto _ : state) {
        benchmark::DoNotOptimize(aoi::simulate_replications(cfg, 8, false));
    }
}

void BM_ReplicationsOmp(benchmark::State& state)
{
    const auto cfg = sim_config();
    for (auto _ : state) {
        benchmark::DoNotOptimize(aoi::simulate_replications(cfg, 8, true));
    }
}

} // namespace

BENCHMARK(BM_ExhaustiveSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExhaustiveOmp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicationsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicationsOmp)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
