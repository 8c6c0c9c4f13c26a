#pragma once

#include <cstdint>
#include <vector>

#include "cpl/tagstream.hpp"

namespace cpl {

/// Binned coincidence counts versus time difference.
///
/// Bin geometry is held exactly in 125 ps ticks; edges are half-open
/// [lo, hi), so a difference exactly on an edge lands in the higher bin.
struct CorrelationHistogram {
  double bin_width_ns = 0.0;
  double t_min_ns = 0.0;
  double t_max_ns = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t n_triggers = 0;

  // exact geometry (derived from the ns values on construction)
  std::int64_t bin_width_ticks = 0;
  std::int64_t t_min_ticks = 0;

  static CorrelationHistogram create(double t_min_ns, double t_max_ns,
                                     double bin_width_ns);

  std::size_t bins() const { return counts.size(); }
  double bin_center_ns(std::size_t k) const {
    return static_cast<double>(t_min_ticks +
                               bin_width_ticks * static_cast<std::int64_t>(k)) *
               kTickNs +
           0.5 * bin_width_ns;
  }
};

/// Coincidence histogram of all pairs (t_a, t_b) with t_b - t_a in
/// [t_min, t_max). Two-pointer sliding-window scan over the sorted
/// streams; n_triggers is set to the size of `a` (the trigger stream when
/// the result feeds the accidental estimate).
CorrelationHistogram cross_histogram(const TagStream& a, const TagStream& b,
                                     double t_min_ns, double t_max_ns,
                                     double bin_width_ns,
                                     unsigned n_threads = 1);

/// Heralded coincidence histogram between the two splitter arms.
///
/// A pair (t1, t2) with dt = t2 - t1 is recorded once per herald t_s for
/// which the earlier of the two tags lies in [t_s, t_s + window): for
/// dt >= 0 that is t1, for dt < 0 it is t2. The later tag may fall outside
/// the window. This is the counting rule whose accidental expectation is
/// exactly the windowed product of the two herald-arm histograms, so
/// independent streams normalize to a flat g2 = 1.
CorrelationHistogram conditional_histogram(const TagStream& s,
                                           const TagStream& i1,
                                           const TagStream& i2,
                                           double window_ns, double t_min_ns,
                                           double t_max_ns, double bin_width_ns,
                                           unsigned n_threads = 1);

/// Expected accidental coincidences per bin of the conditional histogram,
/// plus the Poisson variance of the estimate.
struct AccidentalEstimate {
  double bin_width_ns = 0.0;
  double t_min_ns = 0.0;
  double t_max_ns = 0.0;
  std::uint64_t n_triggers = 0;
  std::vector<double> values;
  std::vector<double> variances;
  std::int64_t bin_width_ticks = 0;
  std::int64_t t_min_ticks = 0;
};

/// Accidental estimate for every output bin center dt:
///   dt >= 0:  N(dt) = sum_{x in [0,W)} G_si1(x) * G_si2(x + dt) / n_triggers
///   dt <  0:  N(dt) = sum_{x in [0,W)} G_si1(x + |dt|) * G_si2(x) / n_triggers
/// Both herald-arm histograms must start at 0 and extend to at least
/// window + max |dt|; bin centers of the output grid must be multiples of
/// the bin width so the shifted sums stay on the histogram grid.
AccidentalEstimate accidental_estimate(const CorrelationHistogram& g_si1,
                                       const CorrelationHistogram& g_si2,
                                       double window_ns, double t_min_ns,
                                       double t_max_ns);

/// The two windowed product sums behind the accidental estimate, already
/// normalized by n_triggers. Exposed separately so the continuity of the
/// estimate at dt = 0 (both forms reduce to the same sum) can be checked
/// against the implementation directly. dt must be a multiple of the bin
/// width; >= 0 for the positive form, <= 0 for the negative form.
double accidental_sum_positive(const CorrelationHistogram& g_si1,
                               const CorrelationHistogram& g_si2,
                               double window_ns, double dt_ns);
double accidental_sum_negative(const CorrelationHistogram& g_si1,
                               const CorrelationHistogram& g_si2,
                               double window_ns, double dt_ns);

/// Normalized conditional correlation with propagated Poisson errors.
struct NormalizedG2 {
  std::vector<double> centers_ns;
  std::vector<double> values;
  std::vector<double> errors;
  std::vector<std::uint8_t> undefined; // raw = 0 and accidental = 0
  std::uint64_t n_triggers = 0;
};

/// Per-bin ratio raw/accidental. The error defaults to g/sqrt(G); the
/// accidental term is added in quadrature when its relative variance
/// exceeds 10% of the raw term. Empty bins with a positive accidental
/// report 0 with a 1/N error bound; accidental = 0 with raw > 0 is an
/// error.
NormalizedG2 normalize_g2(const CorrelationHistogram& raw,
                          const AccidentalEstimate& acc);

/// Fraction of heralds followed by a partner detection within the window,
/// corrected for the expected accidental rate and clamped to [0, 1].
/// duration_ns <= 0 means "estimate the span from the streams".
double heralding_efficiency(const TagStream& s, const TagStream& i,
                            double window_ns, double duration_ns = 0.0);

} // namespace cpl
