#include "cpl/pair_source.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpl/parallel.hpp"
#include "cpl/rng.hpp"

namespace cpl {

namespace {

constexpr double kNsPerS = 1e9;
// Hard cap on the expected number of generated events; beyond this the
// configuration cannot be materialized.
constexpr double kMaxEvents = 4e9;

// Homogeneous Poisson arrivals in [t_begin, t_end) ns for a rate in Hz.
void poisson_arrivals(Rng& rng, double rate_hz, double t_begin, double t_end,
                      std::vector<double>& out) {
  if (rate_hz <= 0.0) return;
  const double mean_gap_ns = kNsPerS / rate_hz;
  double t = t_begin;
  for (;;) {
    t += rng.exponential(mean_gap_ns);
    if (t >= t_end) return;
    out.push_back(t);
  }
}

} // namespace

void validate(const SourceConfig& cfg) {
  if (!(cfg.pair_rate_hz >= 0.0) || !std::isfinite(cfg.pair_rate_hz))
    throw std::invalid_argument("SourceConfig: pair_rate must be >= 0");
  if (!(cfg.tau_ns > 0.0) || !std::isfinite(cfg.tau_ns))
    throw std::invalid_argument("SourceConfig: tau must be > 0");
  if (!(cfg.duration_s > 0.0) || !std::isfinite(cfg.duration_s))
    throw std::invalid_argument("SourceConfig: duration must be > 0");
  if (!(cfg.background_rate_signal_hz >= 0.0) ||
      !std::isfinite(cfg.background_rate_signal_hz))
    throw std::invalid_argument("SourceConfig: signal background rate must be >= 0");
  if (!(cfg.background_rate_idler_hz >= 0.0) ||
      !std::isfinite(cfg.background_rate_idler_hz))
    throw std::invalid_argument("SourceConfig: idler background rate must be >= 0");
}

void validate(const DetectorConfig& det) {
  if (!(det.efficiency >= 0.0 && det.efficiency <= 1.0))
    throw std::invalid_argument("DetectorConfig: efficiency must be in [0,1]");
  if (!(det.dark_rate_hz >= 0.0) || !std::isfinite(det.dark_rate_hz))
    throw std::invalid_argument("DetectorConfig: dark rate must be >= 0");
  if (!(det.jitter_sigma_ps >= 0.0) || !std::isfinite(det.jitter_sigma_ps))
    throw std::invalid_argument("DetectorConfig: jitter sigma must be >= 0");
  if (!(det.dead_time_ns >= 0.0) || !std::isfinite(det.dead_time_ns))
    throw std::invalid_argument("DetectorConfig: dead time must be >= 0");
}

std::uint64_t generation_window_count(const SourceConfig& cfg) {
  return static_cast<std::uint64_t>(
      std::ceil(cfg.duration_s / kGenerationWindowS));
}

TruthEvents generate_window(const SourceConfig& cfg, std::uint64_t seed,
                            std::uint64_t window) {
  validate(cfg);
  const double duration_ns = cfg.duration_s * kNsPerS;
  const double w_begin = static_cast<double>(window) * kGenerationWindowS * kNsPerS;
  const double w_end =
      std::min(duration_ns, w_begin + kGenerationWindowS * kNsPerS);
  TruthEvents events;
  if (w_begin >= w_end) return events;

  {
    Rng rng(derive_seed(seed, stream_id::pairs, window));
    if (cfg.pair_rate_hz > 0.0) {
      const double mean_gap_ns = kNsPerS / cfg.pair_rate_hz;
      double t = w_begin;
      for (;;) {
        t += rng.exponential(mean_gap_ns);
        if (t >= w_end) break;
        events.pairs.push_back({t, t + rng.exponential(cfg.tau_ns)});
      }
    }
  }
  {
    Rng rng(derive_seed(seed, stream_id::background_signal, window));
    poisson_arrivals(rng, cfg.background_rate_signal_hz, w_begin, w_end,
                     events.background_signal_ns);
  }
  {
    Rng rng(derive_seed(seed, stream_id::background_idler, window));
    poisson_arrivals(rng, cfg.background_rate_idler_hz, w_begin, w_end,
                     events.background_idler_ns);
  }
  return events;
}

TruthEvents generate_pairs(const SourceConfig& cfg, std::uint64_t seed,
                           unsigned n_threads) {
  validate(cfg);
  const double expected =
      cfg.duration_s * (cfg.pair_rate_hz + cfg.background_rate_signal_hz +
                        cfg.background_rate_idler_hz);
  if (expected > kMaxEvents)
    throw std::invalid_argument(
        "generate_pairs: duration * rate exceeds event-count capacity");

  const std::uint64_t n_windows = generation_window_count(cfg);
  std::vector<TruthEvents> parts(n_windows);
  parallel_for(n_windows, n_threads, [&](std::size_t w) {
    parts[w] = generate_window(cfg, seed, w);
  });

  TruthEvents all;
  std::size_t n_pairs = 0, n_bg_s = 0, n_bg_i = 0;
  for (const auto& p : parts) {
    n_pairs += p.pairs.size();
    n_bg_s += p.background_signal_ns.size();
    n_bg_i += p.background_idler_ns.size();
  }
  all.pairs.reserve(n_pairs);
  all.background_signal_ns.reserve(n_bg_s);
  all.background_idler_ns.reserve(n_bg_i);
  for (auto& p : parts) {
    all.pairs.insert(all.pairs.end(), p.pairs.begin(), p.pairs.end());
    all.background_signal_ns.insert(all.background_signal_ns.end(),
                                    p.background_signal_ns.begin(),
                                    p.background_signal_ns.end());
    all.background_idler_ns.insert(all.background_idler_ns.end(),
                                   p.background_idler_ns.begin(),
                                   p.background_idler_ns.end());
    p = TruthEvents{};
  }
  return all;
}

TagStream detect(std::span<const double> times_ns, double duration_ns,
                 const DetectorConfig& det, std::uint64_t seed,
                 std::uint8_t channel) {
  validate(det);
  if (!(duration_ns >= 0.0) || !std::isfinite(duration_ns))
    throw std::invalid_argument("detect: duration must be >= 0");
  for (std::size_t i = 1; i < times_ns.size(); ++i)
    if (!(times_ns[i] >= times_ns[i - 1]))
      throw std::invalid_argument("detect: input times must be sorted");
  const double expected_darks = det.dark_rate_hz * duration_ns / kNsPerS;
  if (static_cast<double>(times_ns.size()) + expected_darks > kMaxEvents)
    throw std::invalid_argument("detect: event count exceeds capacity");

  std::vector<double> kept;
  kept.reserve(static_cast<std::size_t>(
      static_cast<double>(times_ns.size()) * det.efficiency + expected_darks +
      64.0));

  const double jitter_ns = det.jitter_sigma_ps * 1e-3;
  {
    Rng rng(derive_seed(seed, stream_id::detect_thin, 0));
    for (const double t : times_ns) {
      if (!rng.bernoulli(det.efficiency)) continue;
      const double tj = jitter_ns > 0.0 ? t + jitter_ns * rng.gauss() : t;
      if (tj >= 0.0 && tj < duration_ns) kept.push_back(tj);
    }
  }
  {
    Rng rng(derive_seed(seed, stream_id::detect_dark, 0));
    poisson_arrivals(rng, det.dark_rate_hz, 0.0, duration_ns, kept);
  }
  std::sort(kept.begin(), kept.end());

  TagStream out;
  out.channel = channel;
  out.ticks.reserve(kept.size());
  std::uint64_t last_tick = 0;
  bool have_last = false;
  for (const double t : kept) {
    const std::uint64_t tick = ns_to_ticks(t);
    if (have_last && det.dead_time_ns > 0.0 &&
        ticks_to_ns(tick - last_tick) < det.dead_time_ns)
      continue;
    out.ticks.push_back(tick);
    last_tick = tick;
    have_last = true;
  }
  return out;
}

std::pair<TagStream, TagStream> beamsplit(const TagStream& tags, double p,
                                          std::uint64_t seed,
                                          std::uint8_t channel_1,
                                          std::uint8_t channel_2) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("beamsplit: p must be in [0,1]");
  TagStream arm1, arm2;
  arm1.channel = channel_1;
  arm2.channel = channel_2;
  Rng rng(derive_seed(seed, stream_id::beamsplit, 0));
  for (const std::uint64_t tick : tags.ticks) {
    if (rng.bernoulli(p))
      arm1.ticks.push_back(tick);
    else
      arm2.ticks.push_back(tick);
  }
  return {std::move(arm1), std::move(arm2)};
}

} // namespace cpl
