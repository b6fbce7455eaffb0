#include "dkrx/analysis.hpp"
#include "dkrx/harness.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace dkrx;

SimConfig bench_config(ReceiverKind receiver) {
    SimConfig c;
    c.receiver = receiver;
    c.trials = 2000;
    c.cycles = 2;
    return c;
}

void BM_experiment(benchmark::State& state, ReceiverKind receiver, Execution execution) {
    const SimConfig config = bench_config(receiver);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_experiment(config, execution).ber_mean);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(config.trials));
}

void BM_theorem_check(benchmark::State& state, Execution execution) {
    RngStream rng(11, 0);
    auto channel = generate_stationary(32, 8, rng);
    channel.H.rowwise().normalize();
    for (auto _ : state) {
        benchmark::DoNotOptimize(theorem_bound_check(channel, 10000, 0.5, {}, 3, execution).lhs_mean);
    }
}

}  // namespace

BENCHMARK_CAPTURE(BM_experiment, sdk_serial, ReceiverKind::sdk, Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_experiment, sdk_parallel, ReceiverKind::sdk, Execution::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_experiment, bdk_serial, ReceiverKind::bdk, Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_experiment, bdk_parallel, ReceiverKind::bdk, Execution::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_experiment, zf_serial, ReceiverKind::zf, Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_experiment, zf_parallel, ReceiverKind::zf, Execution::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_theorem_check, serial, Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_theorem_check, parallel, Execution::parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
