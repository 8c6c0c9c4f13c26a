#include "cpl/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpl/parallel.hpp"
#include "cpl/rng.hpp"

namespace cpl {

namespace {

constexpr std::uint32_t kBlockTraces = 4096;

// One-pole coefficient for the sampling grid.
double pole(double bandwidth_hz, double sample_rate_hz) {
  return std::exp(-2.0 * M_PI * bandwidth_hz / sample_rate_hz);
}

// Zero-phase (forward-backward) one-pole low-pass. Pad length is chosen so
// the truncated impulse response is negligible at the trace edges.
struct ZeroPhaseFilter {
  double a = 0.0;
  std::uint32_t pad = 1;
  double c0 = 1.0; // output variance for unit-variance white input

  explicit ZeroPhaseFilter(double bandwidth_hz, double sample_rate_hz) {
    a = pole(bandwidth_hz, sample_rate_hz);
    if (a > 0.0) {
      const double k = std::ceil(std::log(1e-12) / std::log(a));
      if (!(k < 1e6))
        throw std::invalid_argument(
            "homodyne: bandwidth too low for the trace geometry");
      pad = static_cast<std::uint32_t>(std::max(1.0, k));
    }
    // Kernel g(k) = (1-a)/(1+a) a^|k|; autocorrelation of filtered white
    // noise C(k) = sum_j g(j) g(j+|k|) has the closed form used here.
    const double r = (1.0 - a) / (1.0 + a);
    c0 = r * r * (1.0 + a * a) / (1.0 - a * a);
  }

  void apply(std::vector<double>& x) const {
    const double b = 1.0 - a;
    double acc = 0.0;
    for (double& v : x) {
      acc = a * acc + b * v;
      v = acc;
    }
    acc = 0.0;
    for (std::size_t i = x.size(); i-- > 0;) {
      acc = a * acc + b * x[i];
      x[i] = acc;
    }
  }

  double autocorrelation(std::uint32_t lag) const {
    if (a == 0.0) return lag == 0 ? 1.0 : 0.0;
    const double k = static_cast<double>(lag);
    const double c = ((k - 1.0) * (1.0 - a * a) + 2.0) / (1.0 + a * a);
    return c * std::pow(a, k);
  }
};

struct SynthModel {
  ZeroPhaseFilter filter;
  std::vector<double> psi_filtered; // trace grid
  double noise_scale = 0.0;         // white-noise sigma for unit output variance
  double amplitude_scale = 0.0;     // c
  double eta_eff = 0.0;

  explicit SynthModel(const HomodyneConfig& cfg)
      : filter(cfg.bandwidth_hz, cfg.sample_rate_hz) {
    const double dt_ns = 1e9 / cfg.sample_rate_hz;
    const std::uint32_t len = cfg.trace_length;
    const std::uint32_t pad = filter.pad;

    std::vector<double> padded(len + 2 * pad);
    for (std::size_t g = 0; g < padded.size(); ++g) {
      const double t = (static_cast<double>(g) - pad -
                        static_cast<double>(cfg.trigger_index)) *
                       dt_ns;
      padded[g] = psi(cfg.envelope, t);
    }
    filter.apply(padded);
    psi_filtered.assign(padded.begin() + pad, padded.begin() + pad + len);

    noise_scale = 1.0 / std::sqrt(filter.c0);
    eta_eff = effective_eta(cfg);

    // Calibrate c against the matched-filter identity Var(X) = 1 + 2 eta:
    // with norm^2 = dt^2 psi' R psi (shot noise gives Var(X) = 1) and
    // overlap S = dt sum psi_filtered psi, the photon term must satisfy
    // c^2 S^2 / norm^2 = 2.
    std::vector<double> mode(len);
    for (std::uint32_t i = 0; i < len; ++i) {
      const double t =
          (static_cast<double>(i) - static_cast<double>(cfg.trigger_index)) *
          dt_ns;
      mode[i] = psi(cfg.envelope, t);
    }
    double overlap = 0.0;
    for (std::uint32_t i = 0; i < len; ++i) overlap += psi_filtered[i] * mode[i];
    overlap *= dt_ns;
    double quad = 0.0;
    for (std::uint32_t i = 0; i < len; ++i) {
      double s = 0.0;
      for (std::uint32_t j = 0; j < len; ++j)
        s += mode[j] *
             filter.autocorrelation(i > j ? i - j : j - i);
      quad += mode[i] * s;
    }
    quad *= dt_ns * dt_ns;
    if (!(overlap > 0.0) || !(quad > 0.0))
      throw std::invalid_argument(
          "homodyne: envelope has no support inside the trace window");
    amplitude_scale = std::sqrt(2.0 * quad) / overlap;
  }
};

} // namespace

void validate(const HomodyneConfig& cfg) {
  if (!(cfg.bandwidth_hz > 0.0) || !std::isfinite(cfg.bandwidth_hz))
    throw std::invalid_argument("HomodyneConfig: bandwidth must be > 0");
  if (!(cfg.sample_rate_hz > 2.0 * cfg.bandwidth_hz))
    throw std::invalid_argument(
        "HomodyneConfig: sample rate must exceed twice the bandwidth");
  if (cfg.trace_length == 0)
    throw std::invalid_argument("HomodyneConfig: trace_length must be > 0");
  if (cfg.trigger_index >= cfg.trace_length)
    throw std::invalid_argument("HomodyneConfig: trigger_index outside trace");
  if (cfg.n_traces == 0)
    throw std::invalid_argument("HomodyneConfig: n_traces must be > 0");
  if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0))
    throw std::invalid_argument("HomodyneConfig: eta must be in [0,1]");
  if (!(cfg.mode_match >= 0.0 && cfg.mode_match <= 1.0))
    throw std::invalid_argument("HomodyneConfig: mode_match must be in [0,1]");
  if (!(cfg.electronic_noise >= 0.0) || !std::isfinite(cfg.electronic_noise))
    throw std::invalid_argument("HomodyneConfig: electronic_noise must be >= 0");
  validate(cfg.envelope);
}

PhotonTermModel photon_term_model(const HomodyneConfig& cfg) {
  validate(cfg);
  SynthModel model(cfg);
  PhotonTermModel out;
  out.filtered_envelope = std::move(model.psi_filtered);
  out.amplitude_scale = model.amplitude_scale;
  out.eta_effective = model.eta_eff;
  return out;
}

double noise_autocorrelation(double bandwidth_hz, double sample_rate_hz,
                             std::uint32_t lag) {
  if (bandwidth_hz <= 0.0) return lag == 0 ? 1.0 : 0.0;
  return ZeroPhaseFilter(bandwidth_hz, sample_rate_hz).autocorrelation(lag);
}

TraceSet synth_trace_block(const HomodyneConfig& cfg, std::uint64_t seed,
                           std::uint64_t first_trace, std::uint32_t count,
                           unsigned n_threads) {
  validate(cfg);
  const SynthModel model(cfg);
  const std::uint32_t len = cfg.trace_length;
  const std::uint32_t pad = model.filter.pad;
  const std::size_t padded_len = static_cast<std::size_t>(len) + 2 * pad;

  TraceSet out;
  out.sample_rate_hz = cfg.sample_rate_hz;
  out.trace_length = len;
  out.trigger_index = cfg.trigger_index;
  out.bandwidth_hz = cfg.bandwidth_hz;
  out.samples.resize(static_cast<std::size_t>(count) * len);

  const std::size_t n_blocks = (count + kBlockTraces - 1) / kBlockTraces;
  parallel_for(n_blocks, n_threads, [&](std::size_t blk) {
    std::vector<double> buf(padded_len);
    const std::uint32_t t_begin = static_cast<std::uint32_t>(blk) * kBlockTraces;
    const std::uint32_t t_end =
        std::min(count, t_begin + kBlockTraces);
    for (std::uint32_t k = t_begin; k < t_end; ++k) {
      Rng rng(derive_seed(seed, stream_id::trace, first_trace + k));
      for (auto& v : buf) v = rng.gauss();
      model.filter.apply(buf);
      float* trace = out.samples.data() + static_cast<std::size_t>(k) * len;
      const bool photon = rng.bernoulli(model.eta_eff);
      const double amp =
          photon ? rng.gauss() * model.amplitude_scale : 0.0;
      if (cfg.electronic_noise > 0.0) {
        for (std::uint32_t i = 0; i < len; ++i)
          trace[i] = static_cast<float>(
              buf[pad + i] * model.noise_scale + amp * model.psi_filtered[i] +
              cfg.electronic_noise * rng.gauss());
      } else {
        for (std::uint32_t i = 0; i < len; ++i)
          trace[i] = static_cast<float>(buf[pad + i] * model.noise_scale +
                                        amp * model.psi_filtered[i]);
      }
    }
  });
  return out;
}

TraceSet synth_traces(const HomodyneConfig& cfg, std::uint64_t seed,
                      unsigned n_threads) {
  return synth_trace_block(cfg, seed, 0, cfg.n_traces, n_threads);
}

MomentAccumulator::MomentAccumulator(const TraceSet& geometry_source)
    : sample_rate_hz(geometry_source.sample_rate_hz),
      trace_length(geometry_source.trace_length),
      trigger_index(geometry_source.trigger_index) {
  sum_.assign(trace_length, 0.0);
  sum_sq_.assign(trace_length, 0.0);
}

void MomentAccumulator::add(const TraceSet& block) {
  if (trace_length == 0) {
    sample_rate_hz = block.sample_rate_hz;
    trace_length = block.trace_length;
    trigger_index = block.trigger_index;
    sum_.assign(trace_length, 0.0);
    sum_sq_.assign(trace_length, 0.0);
  }
  if (block.trace_length != trace_length ||
      block.sample_rate_hz != sample_rate_hz ||
      block.trigger_index != trigger_index)
    throw std::invalid_argument("MomentAccumulator: trace geometry differs");
  const std::size_t n = block.n_traces();
  for (std::size_t k = 0; k < n; ++k) {
    const float* trace = block.trace(k);
    for (std::uint32_t i = 0; i < trace_length; ++i) {
      const double v = trace[i];
      sum_[i] += v;
      sum_sq_[i] += v * v;
    }
  }
  n_ += n;
}

std::vector<double> MomentAccumulator::variance() const {
  if (n_ < 2)
    throw std::invalid_argument(
        "MomentAccumulator: need at least 2 traces for a variance");
  std::vector<double> var(trace_length);
  const double n = static_cast<double>(n_);
  for (std::uint32_t i = 0; i < trace_length; ++i)
    var[i] = (sum_sq_[i] - sum_[i] * sum_[i] / n) / (n - 1.0);
  return var;
}

VarianceEnvelope variance_ratio(const MomentAccumulator& traces,
                                const MomentAccumulator& reference) {
  if (traces.trace_length != reference.trace_length ||
      traces.sample_rate_hz != reference.sample_rate_hz ||
      traces.trigger_index != reference.trigger_index)
    throw std::invalid_argument("variance_ratio: trace geometry differs");
  const std::vector<double> vt = traces.variance();
  const std::vector<double> vr = reference.variance();

  VarianceEnvelope env;
  env.sample_rate_hz = traces.sample_rate_hz;
  env.trigger_index = traces.trigger_index;
  env.values.resize(vt.size());
  env.errors.resize(vt.size());
  const double rel2 = 2.0 / (static_cast<double>(traces.count()) - 1.0) +
                      2.0 / (static_cast<double>(reference.count()) - 1.0);
  const double rel = std::sqrt(rel2);
  for (std::size_t i = 0; i < vt.size(); ++i) {
    if (!(vr[i] > 0.0))
      throw std::domain_error("variance_ratio: degenerate reference variance");
    env.values[i] = vt[i] / vr[i];
    env.errors[i] = env.values[i] * rel;
  }
  return env;
}

VarianceEnvelope variance_envelope(const TraceSet& traces,
                                   const TraceSet& reference) {
  MomentAccumulator mt(traces);
  mt.add(traces);
  MomentAccumulator mr(reference);
  mr.add(reference);
  return variance_ratio(mt, mr);
}

std::vector<double> matched_filter(const TraceSet& traces, const Envelope& env,
                                   double bandwidth_hz) {
  validate(env);
  if (traces.trace_length == 0 || traces.n_traces() == 0)
    throw std::invalid_argument("matched_filter: empty trace set");
  const std::uint32_t len = traces.trace_length;
  const double dt_ns = traces.dt_ns();

  std::vector<double> mode(len);
  for (std::uint32_t i = 0; i < len; ++i)
    mode[i] = psi(env, traces.time_ns(i));

  double quad = 0.0;
  if (bandwidth_hz > 0.0) {
    const ZeroPhaseFilter filter(bandwidth_hz, traces.sample_rate_hz);
    for (std::uint32_t i = 0; i < len; ++i) {
      double s = 0.0;
      for (std::uint32_t j = 0; j < len; ++j)
        s += mode[j] * filter.autocorrelation(i > j ? i - j : j - i);
      quad += mode[i] * s;
    }
  } else {
    for (std::uint32_t i = 0; i < len; ++i) quad += mode[i] * mode[i];
  }
  quad *= dt_ns * dt_ns;
  if (!(quad > 0.0))
    throw std::invalid_argument(
        "matched_filter: envelope has no support inside the trace window");
  const double inv_norm = 1.0 / std::sqrt(quad);

  std::vector<double> quadratures(traces.n_traces());
  for (std::size_t k = 0; k < traces.n_traces(); ++k) {
    const float* trace = traces.trace(k);
    double x = 0.0;
    for (std::uint32_t i = 0; i < len; ++i) x += trace[i] * mode[i];
    quadratures[k] = x * dt_ns * inv_norm;
  }
  return quadratures;
}

} // namespace cpl
