#pragma once

#include <cstdint>
#include <vector>

#include "cpl/temporal_mode.hpp"

namespace cpl {

/// Triggered balanced-homodyne acquisition model.
///
/// Trace sample k sits at t = (k - trigger_index) / sample_rate, so the
/// herald click defines t = 0 and envelope.t0_ns is relative to it.
struct HomodyneConfig {
  double sample_rate_hz = 2e9;
  double bandwidth_hz = 2.1e8; // low-pass cutoff of the detection chain
  std::uint32_t trace_length = 320;
  std::uint32_t trigger_index = 64;
  std::uint32_t n_traces = 1000;
  double eta = 0.0;        // heralding efficiency
  double mode_match = 1.0; // field overlap with the local oscillator
  Envelope envelope{EnvelopeKind::Decay, 0.0, 7.2};
  double electronic_noise = 0.0; // additive rms per sample, shot-noise units
};

void validate(const HomodyneConfig& cfg);

/// Probability that a heralded trace actually carries the photon term.
inline double effective_eta(const HomodyneConfig& cfg) {
  return cfg.eta * cfg.mode_match * cfg.mode_match;
}

/// Quadrature traces aligned to the herald trigger, trace-major float32.
/// bandwidth_hz records the noise-shaping filter of the synthesis; it is
/// in-memory metadata only and is not persisted by the trace file format.
struct TraceSet {
  double sample_rate_hz = 0.0;
  std::uint32_t trace_length = 0;
  std::uint32_t trigger_index = 0;
  double bandwidth_hz = 0.0;
  std::vector<float> samples;

  std::size_t n_traces() const {
    return trace_length == 0 ? 0 : samples.size() / trace_length;
  }
  const float* trace(std::size_t k) const {
    return samples.data() + k * trace_length;
  }
  double dt_ns() const { return 1e9 / sample_rate_hz; }
  double time_ns(std::size_t k) const {
    return (static_cast<double>(k) - static_cast<double>(trigger_index)) *
           dt_ns();
  }
};

/// Per-sample variance normalized to the shot-noise reference.
struct VarianceEnvelope {
  double sample_rate_hz = 0.0;
  std::uint32_t trigger_index = 0;
  std::vector<double> values;
  std::vector<double> errors;

  double time_ns(std::size_t k) const {
    return (static_cast<double>(k) - static_cast<double>(trigger_index)) *
           (1e9 / sample_rate_hz);
  }
};

/// Band-limited photon term used by the synthesis: the envelope passed
/// through the same zero-phase low-pass as the shot noise, and the
/// amplitude scale calibrated so the matched-filter quadrature variance is
/// 1 + 2 * eta_effective.
struct PhotonTermModel {
  std::vector<double> filtered_envelope;
  double amplitude_scale = 0.0;
  double eta_effective = 0.0;
};

PhotonTermModel photon_term_model(const HomodyneConfig& cfg);

/// Stationary autocorrelation of the synthesized shot noise at integer lag.
double noise_autocorrelation(double bandwidth_hz, double sample_rate_hz,
                             std::uint32_t lag);

/// Synthesizes traces [first_trace, first_trace + count). Each trace draws
/// from its own RNG substream keyed by the absolute trace index, so block
/// boundaries and thread counts cannot change the result.
TraceSet synth_trace_block(const HomodyneConfig& cfg, std::uint64_t seed,
                           std::uint64_t first_trace, std::uint32_t count,
                           unsigned n_threads = 1);

TraceSet synth_traces(const HomodyneConfig& cfg, std::uint64_t seed,
                      unsigned n_threads = 1);

/// Streaming per-sample moment accumulation, mergeable in block order so
/// large runs never hold all traces in memory.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;
  explicit MomentAccumulator(const TraceSet& geometry_source);

  void add(const TraceSet& block);
  std::uint64_t count() const { return n_; }
  std::vector<double> variance() const;

  double sample_rate_hz = 0.0;
  std::uint32_t trace_length = 0;
  std::uint32_t trigger_index = 0;

 private:
  std::uint64_t n_ = 0;
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
};

/// Ratio of per-sample variances with errors combined in quadrature.
VarianceEnvelope variance_ratio(const MomentAccumulator& traces,
                                const MomentAccumulator& reference);

VarianceEnvelope variance_envelope(const TraceSet& traces,
                                   const TraceSet& reference);

/// Per-trace quadrature X_k = dt * sum_t x_k(t) psi(t) / norm, with norm
/// chosen so pure shot noise at the given bandwidth gives Var(X) = 1.
/// bandwidth_hz = 0 treats the noise as white (sample-uncorrelated).
std::vector<double> matched_filter(const TraceSet& traces, const Envelope& env,
                                   double bandwidth_hz);

} // namespace cpl
