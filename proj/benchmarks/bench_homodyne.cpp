#include <benchmark/benchmark.h>

#include "cpl/homodyne.hpp"
#include "cpl/temporal_mode.hpp"

namespace {

cpl::HomodyneConfig bench_config(std::uint32_t n_traces) {
  cpl::HomodyneConfig cfg;
  cfg.sample_rate_hz = 2e9;
  cfg.bandwidth_hz = 2.1e8;
  cfg.trace_length = 320;
  cfg.trigger_index = 64;
  cfg.n_traces = n_traces;
  cfg.eta = 0.13;
  cfg.envelope = cpl::decay_envelope(7.2);
  return cfg;
}

void BM_SynthTraces(benchmark::State& state) {
  const auto cfg = bench_config(8192);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cpl::synth_traces(cfg, 1, static_cast<unsigned>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_traces);
}
BENCHMARK(BM_SynthTraces)->Arg(1)->Arg(2);

void BM_VarianceAccumulate(benchmark::State& state) {
  const auto cfg = bench_config(8192);
  const cpl::TraceSet traces = cpl::synth_traces(cfg, 1, 2);
  for (auto _ : state) {
    cpl::MomentAccumulator acc(traces);
    acc.add(traces);
    benchmark::DoNotOptimize(acc.variance());
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_traces);
}
BENCHMARK(BM_VarianceAccumulate);

void BM_MatchedFilter(benchmark::State& state) {
  const auto cfg = bench_config(8192);
  const cpl::TraceSet traces = cpl::synth_traces(cfg, 1, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cpl::matched_filter(traces, cfg.envelope, cfg.bandwidth_hz));
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_traces);
}
BENCHMARK(BM_MatchedFilter);

} // namespace

BENCHMARK_MAIN();
