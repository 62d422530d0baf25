#include "obs/batch.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

#include <vector>

namespace {

std::vector<obs::SimConfig> cells(std::size_t n) {
    std::vector<obs::SimConfig> out;
    for (std::size_t i = 0; i < n; ++i) {
        obs::SimConfig c;
        c.policy.scheme = i % 2 ? obs::Scheme::Mlhdr : obs::Scheme::Ahdr;
        c.load = 0.5;
        c.seed = 1 + i;
        c.duration = std::chrono::seconds(1);
        out.push_back(c);
    }
    return out;
}

void BM_BatchSerial(benchmark::State& state) {
    auto cfg = cells(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(obs::run_batch_serial(cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchOpenMP(benchmark::State& state) {
    auto cfg = cells(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(obs::run_batch(cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["threads"] = omp_get_max_threads();
}

BENCHMARK(BM_BatchSerial)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BatchOpenMP)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();

} // namespace

BENCHMARK_MAIN();
