#include <benchmark/benchmark.h>

#include "dragonboat/cohort.hpp"

using namespace dragonboat;

namespace {

std::vector<CohortJob> jobs(int subjects) {
    CohortParams p;
    p.subjects = subjects;
    p.track = "straight";
    return plan_cohort(p);
}

void BM_CohortSerial(benchmark::State& state) {
    const auto js = jobs(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_batch_serial(js));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(js.size()));
}

void BM_CohortParallel(benchmark::State& state) {
    const auto js = jobs(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_batch_parallel(js));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(js.size()));
}

void BM_SingleSession(benchmark::State& state) {
    const auto js = jobs(1);
    for (auto _ : state) benchmark::DoNotOptimize(run_job(js.front()));
}

}  // namespace

BENCHMARK(BM_CohortSerial)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CohortParallel)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SingleSession)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
