#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cpl/tagstream.hpp"

namespace cpl {

/// Physical parameters of the cascade pair source and the uncorrelated
/// background light reaching each collection fiber.
struct SourceConfig {
  double pair_rate_hz = 0.0;        // generated pairs per second
  double tau_ns = 1.0;              // intermediate-level lifetime
  double duration_s = 1.0;          // simulated wall time
  double background_rate_signal_hz = 0.0;
  double background_rate_idler_hz = 0.0;
};

void validate(const SourceConfig& cfg);

/// Detector chain model applied to a photon arrival stream.
struct DetectorConfig {
  double efficiency = 1.0;     // detection probability per photon
  double dark_rate_hz = 0.0;   // Poisson dark counts
  double jitter_sigma_ps = 0.0;
  double dead_time_ns = 0.0;   // non-paralyzable, applied after quantization
};

void validate(const DetectorConfig& det);

struct PairEvent {
  double t_signal_ns;
  double t_idler_ns; // t_signal + Exp(tau): always >= t_signal
};

/// Ground-truth emission times before any detector is applied.
struct TruthEvents {
  std::vector<PairEvent> pairs;             // sorted by t_signal
  std::vector<double> background_signal_ns; // sorted
  std::vector<double> background_idler_ns;  // sorted
};

/// Generation is partitioned into fixed 1 s windows, each driven by an RNG
/// substream derived from (seed, window index). The partition is part of
/// the definition, so results are reproducible bit-for-bit no matter how
/// many threads process the windows.
inline constexpr double kGenerationWindowS = 1.0;

std::uint64_t generation_window_count(const SourceConfig& cfg);

/// Events whose pair emission (or background arrival) falls inside window w.
/// Pure function of (cfg, seed, w); safe to call concurrently.
TruthEvents generate_window(const SourceConfig& cfg, std::uint64_t seed,
                            std::uint64_t window);

/// Full-run generation: concatenation of all windows, in order.
/// Rejects configurations whose expected event count exceeds capacity.
TruthEvents generate_pairs(const SourceConfig& cfg, std::uint64_t seed,
                           unsigned n_threads = 1);

/// Applies the detector chain to sorted photon arrival times (ns):
/// efficiency thinning, Gaussian jitter, dark-count merge, quantization to
/// 125 ps ticks, then dead-time filtering. Events landing outside
/// [0, duration) are dropped (the acquisition gate).
TagStream detect(std::span<const double> times_ns, double duration_ns,
                 const DetectorConfig& det, std::uint64_t seed,
                 std::uint8_t channel = 0);

/// Routes each tag to the first output with probability p, else the second.
/// Counts are conserved and order is preserved.
std::pair<TagStream, TagStream> beamsplit(const TagStream& tags, double p,
                                          std::uint64_t seed,
                                          std::uint8_t channel_1 = 1,
                                          std::uint8_t channel_2 = 2);

} // namespace cpl
