#include <algorithm>
#include <initializer_list>
#include <stdexcept>
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "cpl/pair_source.hpp"

using namespace cpl;

TEST_CASE("zero pair rate gives an empty pair list") {
  SourceConfig cfg;
  cfg.pair_rate_hz = 0.0;
  cfg.tau_ns = 7.2;
  cfg.duration_s = 2.0;
  const TruthEvents ev = generate_pairs(cfg, 1);
  CHECK(ev.pairs.empty());
}

TEST_CASE("pair count follows Poisson statistics") {
  SourceConfig cfg;
  cfg.pair_rate_hz = 1e5;
  cfg.tau_ns = 7.2;
  cfg.duration_s = 1.0;
  const TruthEvents ev = generate_pairs(cfg, 99);
  const double expected = 1e5;
  const double sigma = std::sqrt(expected);
  CHECK(std::fabs(static_cast<double>(ev.pairs.size()) - expected) <
        5.0 * sigma);
}

TEST_CASE("idler delay mean matches tau") {
  SourceConfig cfg;
  cfg.pair_rate_hz = 2e5;
  cfg.tau_ns = 7.2;
  cfg.duration_s = 1.0;
  const TruthEvents ev = generate_pairs(cfg, 7);
  REQUIRE(ev.pairs.size() > 100000);
  double sum = 0.0;
  for (const PairEvent& p : ev.pairs) sum += p.t_idler_ns - p.t_signal_ns;
  const double n = static_cast<double>(ev.pairs.size());
  const double mean = sum / n;
  const double standard_error = cfg.tau_ns / std::sqrt(n); // exp sd = mean
  CHECK(std::fabs(mean - cfg.tau_ns) < 3.0 * standard_error);
}

TEST_CASE("cascade ordering: idler never precedes its signal") {
  SourceConfig cfg;
  cfg.pair_rate_hz = 5e4;
  cfg.tau_ns = 3.0;
  cfg.duration_s = 1.0;
  const TruthEvents ev = generate_pairs(cfg, 3);
  for (const PairEvent& p : ev.pairs) CHECK(p.t_idler_ns >= p.t_signal_ns);
  for (std::size_t i = 1; i < ev.pairs.size(); ++i)
    CHECK(ev.pairs[i].t_signal_ns >= ev.pairs[i - 1].t_signal_ns);
}

TEST_CASE("generation is bit-identical across thread counts") {
  SourceConfig cfg;
  cfg.pair_rate_hz = 3e4;
  cfg.tau_ns = 7.2;
  cfg.duration_s = 5.3;
  cfg.background_rate_signal_hz = 1e4;
  cfg.background_rate_idler_hz = 2e4;
  const TruthEvents a = generate_pairs(cfg, 1234, 1);
  const TruthEvents b = generate_pairs(cfg, 1234, 8);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].t_signal_ns == b.pairs[i].t_signal_ns);
    CHECK(a.pairs[i].t_idler_ns == b.pairs[i].t_idler_ns);
  }
  CHECK(a.background_signal_ns == b.background_signal_ns);
  CHECK(a.background_idler_ns == b.background_idler_ns);
}

TEST_CASE("capacity overflow is rejected") {
  SourceConfig cfg;
  cfg.pair_rate_hz = 1e12;
  cfg.tau_ns = 7.2;
  cfg.duration_s = 100.0;
  CHECK_THROWS_AS(generate_pairs(cfg, 1), std::invalid_argument);
}

TEST_CASE("identity detector path quantizes only") {
  std::vector<double> times{0.1, 5.0, 5.05, 123.456, 1000.0};
  DetectorConfig det; // efficiency 1, no dark, no jitter, no dead time
  const TagStream tags = detect(times, 2000.0, det, 42, 3);
  CHECK(tags.channel == 3);
  REQUIRE(tags.size() == times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(tags.ticks[i] == ns_to_ticks(times[i]));
}

TEST_CASE("efficiency thins binomially") {
  std::vector<double> times(1000000);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = 10.0 * i;
  DetectorConfig det;
  det.efficiency = 0.4;
  const TagStream tags = detect(times, 10.0 * times.size() + 10, det, 5);
  const double expected = 4e5;
  const double sigma = std::sqrt(1e6 * 0.4 * 0.6);
  CHECK(std::fabs(static_cast<double>(tags.size()) - expected) < 5.0 * sigma);
}

TEST_CASE("dark counts alone form the configured Poisson process") {
  DetectorConfig det;
  det.dark_rate_hz = 150.0;
  const TagStream tags = detect({}, 10e9, det, 11);
  const double expected = 1500.0;
  CHECK(std::fabs(static_cast<double>(tags.size()) - expected) <
        5.0 * std::sqrt(expected));
}

TEST_CASE("detected rate composes efficiency times rate plus dark rate") {
  SourceConfig cfg;
  cfg.pair_rate_hz = 1e5;
  cfg.tau_ns = 7.2;
  cfg.duration_s = 2.0;
  const TruthEvents ev = generate_pairs(cfg, 21);
  std::vector<double> times;
  times.reserve(ev.pairs.size());
  for (const PairEvent& p : ev.pairs) times.push_back(p.t_signal_ns);
  DetectorConfig det;
  det.efficiency = 0.37;
  det.dark_rate_hz = 500.0;
  const TagStream tags = detect(times, cfg.duration_s * 1e9, det, 77);
  const double expected = (1e5 * 0.37 + 500.0) * cfg.duration_s;
  CHECK(std::fabs(static_cast<double>(tags.size()) - expected) <
        5.0 * std::sqrt(expected));
}

TEST_CASE("jitter displaces but survives the acquisition gate") {
  std::vector<double> times(10000);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = 100.0 + 10.0 * i;
  DetectorConfig det;
  det.jitter_sigma_ps = 600.0;
  const TagStream tags = detect(times, 2e6, det, 9);
  CHECK(tags.size() == times.size());
  // displaced tick rms about 600 ps / 125 ps
  double sq = 0.0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const double d = ticks_to_ns(tags.ticks[i]) - times[i];
    sq += d * d;
  }
  const double rms_ns = std::sqrt(sq / tags.size());
  CHECK(rms_ns > 0.4);
  CHECK(rms_ns < 0.8);
}

TEST_CASE("dead time never increases the tag count and enforces spacing") {
  std::vector<double> times;
  for (int i = 0; i < 20000; ++i) times.push_back(0.3 * i);
  DetectorConfig det;
  std::size_t previous = times.size() + 1;
  for (const double dead : {0.0, 0.5, 1.0, 5.0}) {
    det.dead_time_ns = dead;
    const TagStream tags = detect(times, 1e7, det, 2);
    CHECK(tags.size() <= previous);
    previous = tags.size();
    if (dead > 0.0)
      for (std::size_t i = 1; i < tags.size(); ++i)
        CHECK(ticks_to_ns(tags.ticks[i] - tags.ticks[i - 1]) >= dead);
  }
}

TEST_CASE("unsorted detector input is rejected") {
  std::vector<double> times{5.0, 1.0};
  CHECK_THROWS_AS(detect(times, 100.0, DetectorConfig{}, 1),
                  std::invalid_argument);
}

TEST_CASE("beamsplit degenerate p routes everything to one arm") {
  TagStream tags;
  tags.ticks = {1, 5, 9, 100};
  const auto [a1, a2] = beamsplit(tags, 1.0, 3);
  CHECK(a1.size() == 4);
  CHECK(a2.empty());
  const auto [b1, b2] = beamsplit(tags, 0.0, 3);
  CHECK(b1.empty());
  CHECK(b2.size() == 4);
}

TEST_CASE("beamsplit conserves counts and order for any p") {
  TagStream tags;
  for (int i = 0; i < 100000; ++i) tags.ticks.push_back(10 * i);
  for (const double p : {0.25, 0.5, 0.9}) {
    const auto [a1, a2] = beamsplit(tags, p, 17);
    CHECK(a1.size() + a2.size() == tags.size());
    CHECK(std::is_sorted(a1.ticks.begin(), a1.ticks.end()));
    CHECK(std::is_sorted(a2.ticks.begin(), a2.ticks.end()));
  }
}

TEST_CASE("balanced beamsplit splits binomially") {
  TagStream tags;
  for (int i = 0; i < 1000000; ++i) tags.ticks.push_back(8 * i);
  const auto [a1, a2] = beamsplit(tags, 0.5, 23);
  const double n = static_cast<double>(tags.size());
  const double sigma = std::sqrt(n * 0.25);
  CHECK(std::fabs(static_cast<double>(a1.size()) - n / 2.0) < 5.0 * sigma);
  CHECK_THROWS_AS(beamsplit(tags, 1.5, 1), std::invalid_argument);
}
