#include <benchmark/benchmark.h>

#include "cpl/correlation.hpp"
#include "cpl/rng.hpp"

namespace {

cpl::TagStream poisson_stream(double rate_hz, double duration_s,
                              std::uint64_t seed) {
  cpl::Rng rng(seed);
  cpl::TagStream s;
  const double mean_gap_ns = 1e9 / rate_hz;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(mean_gap_ns);
    if (t >= duration_s * 1e9) break;
    s.ticks.push_back(cpl::ns_to_ticks(t));
  }
  return s;
}

void BM_CrossHistogram(benchmark::State& state) {
  const auto a = poisson_stream(5e4, 10.0, 1);
  const auto b = poisson_stream(1e5, 10.0, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cpl::cross_histogram(a, b, 0.0, 60.0, 2.0,
                             static_cast<unsigned>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(a.size() + b.size()));
}
BENCHMARK(BM_CrossHistogram)->Arg(1)->Arg(2);

void BM_ConditionalHistogram(benchmark::State& state) {
  const auto s = poisson_stream(5e4, 10.0, 1);
  const auto i1 = poisson_stream(1e5, 10.0, 2);
  const auto i2 = poisson_stream(1e5, 10.0, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cpl::conditional_histogram(
        s, i1, i2, 30.0, -31.0, 31.0, 2.0,
        static_cast<unsigned>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(s.size()));
}
BENCHMARK(BM_ConditionalHistogram)->Arg(1)->Arg(2);

void BM_HeraldingEfficiency(benchmark::State& state) {
  const auto s = poisson_stream(5e4, 10.0, 1);
  const auto i = poisson_stream(2e5, 10.0, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(cpl::heralding_efficiency(s, i, 30.0));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(s.size() + i.size()));
}
BENCHMARK(BM_HeraldingEfficiency);

} // namespace

BENCHMARK_MAIN();
