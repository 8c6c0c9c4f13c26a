#include <benchmark/benchmark.h>

#include <filesystem>

#include "cpl/rng.hpp"
#include "cpl/tagio.hpp"

namespace {

std::vector<cpl::TagStream> make_streams(std::size_t tags_per_channel) {
  cpl::Rng rng(1);
  std::vector<cpl::TagStream> streams(3);
  for (std::uint8_t c = 0; c < 3; ++c) {
    streams[c].channel = c;
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < tags_per_channel; ++i) {
      t += static_cast<std::uint64_t>(rng.uniform() * 400.0);
      streams[c].ticks.push_back(t);
    }
  }
  return streams;
}

void BM_WriteReadTags(benchmark::State& state) {
  const auto streams = make_streams(static_cast<std::size_t>(state.range(0)));
  const auto path = std::filesystem::temp_directory_path() / "cpl_bench.cptag";
  for (auto _ : state) {
    cpl::write_tags(path, streams);
    benchmark::DoNotOptimize(cpl::read_tags(path));
  }
  state.SetItemsProcessed(state.iterations() * 3 * state.range(0));
  std::filesystem::remove(path);
}
BENCHMARK(BM_WriteReadTags)->Arg(1 << 14)->Arg(1 << 18);

} // namespace

BENCHMARK_MAIN();
