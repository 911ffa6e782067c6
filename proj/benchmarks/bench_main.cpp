#include <benchmark/benchmark.h>

#include "mtcagg/engine.hpp"
#include "mtcagg/event_queue.hpp"
#include "mtcagg/protocol.hpp"
#include "mtcagg/rng.hpp"
#include "mtcagg/spatial.hpp"

using namespace mtcagg;

namespace {

ScenarioConfig config(std::uint32_t m, std::uint32_t n) {
    ScenarioConfig c;
    c.num_mtds = m;
    c.num_aggregators = n;
    c.packet_rate_per_s = 1.0 / 60;
    c.bundle_limit = 10;
    return c;
}

void BM_EventQueue(benchmark::State& state) {
    const auto n = static_cast<std::uint32_t>(state.range(0));
    Rng rng(1);
    for (auto _ : state) {
        EventQueue q;
        for (std::uint32_t i = 0; i < n; ++i)
            q.schedule(static_cast<std::int64_t>(rng.uniform_int(0, 60000)), EventKind::arrival, i);
        while (!q.empty()) benchmark::DoNotOptimize(q.next_event());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EventQueue)->Arg(1 << 10)->Arg(1 << 16);

void BM_Deploy(benchmark::State& state) {
    const auto c = config(5000, static_cast<std::uint32_t>(state.range(0)));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(deploy(c, ++seed));
}
BENCHMARK(BM_Deploy)->Arg(10)->Arg(100)->Arg(500);

void BM_RachRound(benchmark::State& state) {
    std::vector<std::uint32_t> contenders(static_cast<std::size_t>(state.range(0)));
    for (std::uint32_t i = 0; i < contenders.size(); ++i) contenders[i] = i;
    Rng rng(3);
    for (auto _ : state) benchmark::DoNotOptimize(run_rach_round(contenders, 54, rng));
}
BENCHMARK(BM_RachRound)->Arg(10)->Arg(60);

void BM_Run(benchmark::State& state) {
    const auto c = config(5000, static_cast<std::uint32_t>(state.range(0)));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run(c, ++seed));
}
BENCHMARK(BM_Run)->Arg(0)->Arg(1)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
