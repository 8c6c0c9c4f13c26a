#pragma once

namespace cpl {

enum class EnvelopeKind { Decay, Rise };

/// Normalized single-photon temporal mode: a one-sided exponential in
/// intensity, referenced to a trigger time t0.
///
/// The amplitude falls with constant 2*tau so that |psi|^2 falls with tau;
/// tau is therefore directly the intensity/variance time constant seen in
/// coincidence histograms and homodyne variance envelopes.
struct Envelope {
  EnvelopeKind kind = EnvelopeKind::Decay;
  double t0_ns = 0.0;
  double tau_ns = 1.0;
};

/// Throws std::invalid_argument unless tau > 0 and fields are finite.
void validate(const Envelope& env);

Envelope decay_envelope(double tau_ns, double t0_ns = 0.0);
Envelope rise_envelope(double tau_ns, double t0_ns = 0.0);

/// Amplitude density psi(t) in ns^-1/2. |psi|^2 integrates to 1 over the
/// envelope support. Decay vanishes for t < t0, Rise for t > t0; both reach
/// sqrt(1/tau) at t0.
double psi(const Envelope& env, double t_ns);

/// Swaps Decay <-> Rise keeping t0 and tau. psi of the reversed envelope is
/// the exact mirror image through t0: psi(rev, t0 + d) == psi(env, t0 - d).
Envelope time_reverse(const Envelope& env);

} // namespace cpl
