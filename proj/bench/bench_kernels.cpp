// Serial reference vs OpenMP kernels for offline trace analysis.
//
//   ./build/bench/bench_kernels --benchmark_min_time=0.2
//
// Set OMP_NUM_THREADS to control the parallel variants.

#include <benchmark/benchmark.h>

#include <vector>

#include "cotloop/analysis.hpp"
#include "cotloop/detector.hpp"
#include "cotloop/synth.hpp"

namespace {

using namespace cotloop;

Trace make_trace(std::size_t dim, std::size_t length) {
  SynthSpec spec;
  spec.kind = SynthKind::composite;
  spec.dim = dim;
  spec.length = length;
  spec.period = 4;
  spec.noise_sigma = 0.05;
  spec.segments = {{SynthKind::random_walk, length / 2}, {SynthKind::periodic, length - length / 2}};
  spec.seed = 11;
  return generate(spec);
}

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp");
}

void BM_Dynamics(benchmark::State& state) {
  const Trace trace = make_trace(static_cast<std::size_t>(state.range(1)), 4096);
  for (auto _ : state) benchmark::DoNotOptimize(trajectory_dynamics(trace, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(trace.size() - 1));
  label(state);
}
BENCHMARK(BM_Dynamics)->ArgsProduct({{0, 1}, {64, 4096}});

void BM_WindowEstimates(benchmark::State& state) {
  const Trace trace = make_trace(64, static_cast<std::size_t>(state.range(1)));
  const auto dyn = trajectory_dynamics(trace, Exec::serial);
  const DetectorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(window_estimates(dyn, cfg, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(dyn.size()));
  label(state);
}
BENCHMARK(BM_WindowEstimates)->ArgsProduct({{0, 1}, {1024, 16384}});

void BM_Sweep(benchmark::State& state) {
  const Trace trace = make_trace(256, 2048);
  const std::vector<double> rho{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const std::vector<int> stab{1, 2, 4, 6, 8, 10, 12, 14, 16};
  for (auto _ : state) benchmark::DoNotOptimize(sweep(trace, DetectorConfig{}, rho, stab, exec_of(state)));
  label(state);
}
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1);

void BM_BatchAnalyze(benchmark::State& state) {
  std::vector<Trace> traces;
  for (int i = 0; i < 32; ++i) traces.push_back(make_trace(512, 512));
  const DetectorConfig cfg{.exit_mode = ExitMode::monitor};
  for (auto _ : state) benchmark::DoNotOptimize(analyze_batch(traces, cfg, exec_of(state)));
  label(state);
}
BENCHMARK(BM_BatchAnalyze)->Arg(0)->Arg(1);

// Per-step cost of the streaming path at a realistic hidden size.
void BM_SessionPush(benchmark::State& state) {
  const Trace trace = make_trace(static_cast<std::size_t>(state.range(0)), 1024);
  for (auto _ : state) {
    DetectorSession session(DetectorConfig{.exit_mode = ExitMode::monitor});
    for (const auto& rec : trace.records) benchmark::DoNotOptimize(session.push(rec.embedding));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(trace.size()));
}
BENCHMARK(BM_SessionPush)->Arg(64)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
