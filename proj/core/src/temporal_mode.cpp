#include "cpl/temporal_mode.hpp"

#include <cmath>
#include <stdexcept>

namespace cpl {

void validate(const Envelope& env) {
  if (!(env.tau_ns > 0.0) || !std::isfinite(env.tau_ns))
    throw std::invalid_argument("Envelope: tau must be positive and finite");
  if (!std::isfinite(env.t0_ns))
    throw std::invalid_argument("Envelope: t0 must be finite");
}

Envelope decay_envelope(double tau_ns, double t0_ns) {
  Envelope env{EnvelopeKind::Decay, t0_ns, tau_ns};
  validate(env);
  return env;
}

Envelope rise_envelope(double tau_ns, double t0_ns) {
  Envelope env{EnvelopeKind::Rise, t0_ns, tau_ns};
  validate(env);
  return env;
}

double psi(const Envelope& env, double t_ns) {
  const double dt = t_ns - env.t0_ns;
  if (env.kind == EnvelopeKind::Decay) {
    if (dt < 0.0) return 0.0;
    return std::sqrt(1.0 / env.tau_ns) * std::exp(-dt / (2.0 * env.tau_ns));
  }
  if (dt > 0.0) return 0.0;
  return std::sqrt(1.0 / env.tau_ns) * std::exp(dt / (2.0 * env.tau_ns));
}

Envelope time_reverse(const Envelope& env) {
  Envelope out = env;
  out.kind =
      env.kind == EnvelopeKind::Decay ? EnvelopeKind::Rise : EnvelopeKind::Decay;
  return out;
}

} // namespace cpl
