#include "cpl/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cpl/parallel.hpp"

namespace cpl {

namespace {

constexpr std::size_t kHeraldChunk = 1 << 16;

std::int64_t to_ticks_checked(double ns, const char* what) {
  const double scaled = ns / kTickNs;
  const double rounded = std::nearbyint(scaled);
  if (!std::isfinite(scaled) || std::fabs(scaled - rounded) > 1e-6)
    throw std::invalid_argument(std::string(what) +
                                " must be a multiple of the 125 ps tick");
  return static_cast<std::int64_t>(rounded);
}

void require_sorted(const TagStream& s, const char* name) {
  for (std::size_t i = 1; i < s.ticks.size(); ++i)
    if (s.ticks[i] < s.ticks[i - 1])
      throw std::invalid_argument(std::string("unsorted tag stream: ") + name);
}

inline std::int64_t as_signed(std::uint64_t t) {
  return static_cast<std::int64_t>(t);
}

// Indices of stream entries in [lo, hi) assuming sorted ticks.
struct Window {
  std::size_t begin, end;
};

Window window_in(const std::vector<std::uint64_t>& ticks, std::int64_t lo,
                 std::int64_t hi) {
  const auto b = std::lower_bound(ticks.begin(), ticks.end(),
                                  lo < 0 ? 0ull : static_cast<std::uint64_t>(lo));
  const auto e = hi < 0 ? b
                        : std::lower_bound(b, ticks.end(),
                                           static_cast<std::uint64_t>(hi));
  return {static_cast<std::size_t>(b - ticks.begin()),
          static_cast<std::size_t>(e - ticks.begin())};
}

} // namespace

CorrelationHistogram CorrelationHistogram::create(double t_min_ns,
                                                  double t_max_ns,
                                                  double bin_width_ns) {
  CorrelationHistogram h;
  if (!(bin_width_ns > 0.0))
    throw std::invalid_argument("histogram: bin width must be > 0");
  h.bin_width_ticks = to_ticks_checked(bin_width_ns, "bin width");
  h.t_min_ticks = to_ticks_checked(t_min_ns, "range start");
  const std::int64_t t_max_ticks = to_ticks_checked(t_max_ns, "range end");
  const std::int64_t span = t_max_ticks - h.t_min_ticks;
  if (span <= 0 || span % h.bin_width_ticks != 0)
    throw std::invalid_argument(
        "histogram: range must be a positive integer multiple of the bin width");
  h.bin_width_ns = static_cast<double>(h.bin_width_ticks) * kTickNs;
  h.t_min_ns = static_cast<double>(h.t_min_ticks) * kTickNs;
  h.t_max_ns = static_cast<double>(t_max_ticks) * kTickNs;
  h.counts.assign(static_cast<std::size_t>(span / h.bin_width_ticks), 0);
  return h;
}

CorrelationHistogram cross_histogram(const TagStream& a, const TagStream& b,
                                     double t_min_ns, double t_max_ns,
                                     double bin_width_ns, unsigned n_threads) {
  require_sorted(a, "a");
  require_sorted(b, "b");
  CorrelationHistogram hist =
      CorrelationHistogram::create(t_min_ns, t_max_ns, bin_width_ns);
  hist.n_triggers = a.size();
  if (a.empty() || b.empty()) return hist;

  const std::int64_t lo = hist.t_min_ticks;
  const std::int64_t hi =
      hist.t_min_ticks +
      hist.bin_width_ticks * static_cast<std::int64_t>(hist.bins());
  const std::size_t n_chunks = (a.size() + kHeraldChunk - 1) / kHeraldChunk;
  std::vector<std::vector<std::uint64_t>> partial(
      n_chunks, std::vector<std::uint64_t>(hist.bins(), 0));

  parallel_for(n_chunks, n_threads, [&](std::size_t c) {
    auto& counts = partial[c];
    const std::size_t i_begin = c * kHeraldChunk;
    const std::size_t i_end = std::min(a.size(), i_begin + kHeraldChunk);
    // two-pointer scan: both bounds advance monotonically with a[i]
    const std::int64_t first = as_signed(a.ticks[i_begin]);
    Window w = window_in(b.ticks, first + lo, first + hi);
    std::size_t p_lo = w.begin, p_hi = w.end;
    for (std::size_t i = i_begin; i < i_end; ++i) {
      const std::int64_t t = as_signed(a.ticks[i]);
      while (p_lo < b.size() && as_signed(b.ticks[p_lo]) < t + lo) ++p_lo;
      if (p_hi < p_lo) p_hi = p_lo;
      while (p_hi < b.size() && as_signed(b.ticks[p_hi]) < t + hi) ++p_hi;
      for (std::size_t j = p_lo; j < p_hi; ++j) {
        const std::int64_t dt = as_signed(b.ticks[j]) - t;
        ++counts[static_cast<std::size_t>((dt - lo) / hist.bin_width_ticks)];
      }
    }
  });

  for (const auto& counts : partial)
    for (std::size_t k = 0; k < counts.size(); ++k) hist.counts[k] += counts[k];
  return hist;
}

CorrelationHistogram conditional_histogram(const TagStream& s,
                                           const TagStream& i1,
                                           const TagStream& i2,
                                           double window_ns, double t_min_ns,
                                           double t_max_ns, double bin_width_ns,
                                           unsigned n_threads) {
  require_sorted(s, "s");
  require_sorted(i1, "i1");
  require_sorted(i2, "i2");
  const std::int64_t window = to_ticks_checked(window_ns, "window");
  if (window <= 0)
    throw std::invalid_argument("conditional_histogram: window must be > 0");
  CorrelationHistogram hist =
      CorrelationHistogram::create(t_min_ns, t_max_ns, bin_width_ns);
  hist.n_triggers = s.size();
  if (s.empty()) return hist;

  const std::int64_t lo = hist.t_min_ticks;
  const std::int64_t hi =
      hist.t_min_ticks +
      hist.bin_width_ticks * static_cast<std::int64_t>(hist.bins());
  const std::int64_t pos_lo = std::max<std::int64_t>(lo, 0);
  const bool has_pos = hi > pos_lo;    // dt >= 0 part
  const std::int64_t neg_hi = std::min<std::int64_t>(hi, 0);
  const bool has_neg = neg_hi > lo;    // dt < 0 part

  const std::size_t n_chunks = (s.size() + kHeraldChunk - 1) / kHeraldChunk;
  std::vector<std::vector<std::uint64_t>> partial(
      n_chunks, std::vector<std::uint64_t>(hist.bins(), 0));

  parallel_for(n_chunks, n_threads, [&](std::size_t c) {
    auto& counts = partial[c];
    const std::size_t h_begin = c * kHeraldChunk;
    const std::size_t h_end = std::min(s.size(), h_begin + kHeraldChunk);
    auto bin_of = [&](std::int64_t dt) {
      return static_cast<std::size_t>((dt - lo) / hist.bin_width_ticks);
    };
    for (std::size_t h = h_begin; h < h_end; ++h) {
      const std::int64_t ts = as_signed(s.ticks[h]);
      if (has_pos) {
        // earlier tag is on arm 1 and must lie in the herald window
        const Window w1 = window_in(i1.ticks, ts, ts + window);
        for (std::size_t j = w1.begin; j < w1.end; ++j) {
          const std::int64_t t1 = as_signed(i1.ticks[j]);
          const Window w2 = window_in(i2.ticks, t1 + pos_lo, t1 + hi);
          for (std::size_t k = w2.begin; k < w2.end; ++k)
            ++counts[bin_of(as_signed(i2.ticks[k]) - t1)];
        }
      }
      if (has_neg) {
        // dt < 0: the earlier tag is on arm 2; partner on arm 1 is later
        const Window w2 = window_in(i2.ticks, ts, ts + window);
        for (std::size_t j = w2.begin; j < w2.end; ++j) {
          const std::int64_t t2 = as_signed(i2.ticks[j]);
          // dt in [lo, neg_hi)  <=>  t1 in (t2 - neg_hi, t2 - lo]
          const Window w1 = window_in(i1.ticks, t2 - neg_hi + 1, t2 - lo + 1);
          for (std::size_t k = w1.begin; k < w1.end; ++k)
            ++counts[bin_of(t2 - as_signed(i1.ticks[k]))];
        }
      }
    }
  });

  for (const auto& counts : partial)
    for (std::size_t k = 0; k < counts.size(); ++k) hist.counts[k] += counts[k];
  return hist;
}

namespace {

struct SumVar {
  double sum = 0.0;
  double var = 0.0;
};

// Common validation for the accidental-sum inputs; returns bins per window.
std::size_t accidental_prepare(const CorrelationHistogram& g_si1,
                               const CorrelationHistogram& g_si2,
                               double window_ns) {
  if (g_si1.bin_width_ticks != g_si2.bin_width_ticks)
    throw std::invalid_argument("accidental_estimate: bin widths differ");
  if (g_si1.t_min_ticks != 0 || g_si2.t_min_ticks != 0)
    throw std::invalid_argument(
        "accidental_estimate: herald-arm histograms must start at 0");
  if (g_si1.n_triggers == 0 || g_si1.n_triggers != g_si2.n_triggers)
    throw std::invalid_argument(
        "accidental_estimate: histograms must share a positive trigger count");
  const std::int64_t bw = g_si1.bin_width_ticks;
  const std::int64_t window = to_ticks_checked(window_ns, "window");
  if (window <= 0 || window % bw != 0)
    throw std::invalid_argument(
        "accidental_estimate: window must be a positive multiple of the bin width");
  return static_cast<std::size_t>(window / bw);
}

// Windowed product sum at a shift of `shift` bins. negative_form selects
// which histogram carries the shift; at shift = 0 both forms execute the
// identical sum.
SumVar windowed_product(const CorrelationHistogram& g_si1,
                        const CorrelationHistogram& g_si2, std::size_t n_win,
                        std::size_t shift, bool negative_form) {
  const CorrelationHistogram& shifted = negative_form ? g_si1 : g_si2;
  if (n_win + shift > shifted.bins())
    throw std::invalid_argument(
        "accidental_estimate: insufficient histogram support");
  if (n_win > (negative_form ? g_si2 : g_si1).bins())
    throw std::invalid_argument(
        "accidental_estimate: insufficient histogram support");
  SumVar out;
  for (std::size_t j = 0; j < n_win; ++j) {
    const double a =
        static_cast<double>(g_si1.counts[negative_form ? j + shift : j]);
    const double b =
        static_cast<double>(g_si2.counts[negative_form ? j : j + shift]);
    out.sum += a * b;
    out.var += a * a * b + b * b * a;
  }
  return out;
}

std::size_t shift_bins_checked(const CorrelationHistogram& g, double dt_ns,
                               bool negative_form) {
  const std::int64_t dt = to_ticks_checked(dt_ns, "dt");
  if (negative_form ? dt > 0 : dt < 0)
    throw std::invalid_argument("accidental sum: dt sign does not match form");
  const std::int64_t mag = negative_form ? -dt : dt;
  if (mag % g.bin_width_ticks != 0)
    throw std::invalid_argument(
        "accidental sum: dt must be a multiple of the bin width");
  return static_cast<std::size_t>(mag / g.bin_width_ticks);
}

} // namespace

double accidental_sum_positive(const CorrelationHistogram& g_si1,
                               const CorrelationHistogram& g_si2,
                               double window_ns, double dt_ns) {
  const std::size_t n_win = accidental_prepare(g_si1, g_si2, window_ns);
  const std::size_t shift = shift_bins_checked(g_si1, dt_ns, false);
  return windowed_product(g_si1, g_si2, n_win, shift, false).sum /
         static_cast<double>(g_si1.n_triggers);
}

double accidental_sum_negative(const CorrelationHistogram& g_si1,
                               const CorrelationHistogram& g_si2,
                               double window_ns, double dt_ns) {
  const std::size_t n_win = accidental_prepare(g_si1, g_si2, window_ns);
  const std::size_t shift = shift_bins_checked(g_si1, dt_ns, true);
  return windowed_product(g_si1, g_si2, n_win, shift, true).sum /
         static_cast<double>(g_si1.n_triggers);
}

AccidentalEstimate accidental_estimate(const CorrelationHistogram& g_si1,
                                       const CorrelationHistogram& g_si2,
                                       double window_ns, double t_min_ns,
                                       double t_max_ns) {
  const std::size_t n_win = accidental_prepare(g_si1, g_si2, window_ns);
  const std::int64_t bw = g_si1.bin_width_ticks;

  AccidentalEstimate acc;
  const CorrelationHistogram grid =
      CorrelationHistogram::create(t_min_ns, t_max_ns, g_si1.bin_width_ns);
  acc.bin_width_ns = grid.bin_width_ns;
  acc.t_min_ns = grid.t_min_ns;
  acc.t_max_ns = grid.t_max_ns;
  acc.bin_width_ticks = grid.bin_width_ticks;
  acc.t_min_ticks = grid.t_min_ticks;
  acc.n_triggers = g_si1.n_triggers;
  acc.values.assign(grid.bins(), 0.0);
  acc.variances.assign(grid.bins(), 0.0);

  const double inv_n = 1.0 / static_cast<double>(acc.n_triggers);
  for (std::size_t k = 0; k < grid.bins(); ++k) {
    const std::int64_t center2 =
        2 * (grid.t_min_ticks + bw * static_cast<std::int64_t>(k)) + bw;
    if (center2 % (2 * bw) != 0)
      throw std::invalid_argument(
          "accidental_estimate: output bin centers must be multiples of the bin width");
    const std::int64_t shift = center2 / (2 * bw); // signed, in bins
    const bool negative_form = shift < 0;
    const SumVar sv =
        windowed_product(g_si1, g_si2, n_win,
                         static_cast<std::size_t>(negative_form ? -shift : shift),
                         negative_form);
    acc.values[k] = sv.sum * inv_n;
    acc.variances[k] = sv.var * inv_n * inv_n;
  }
  return acc;
}

NormalizedG2 normalize_g2(const CorrelationHistogram& raw,
                          const AccidentalEstimate& acc) {
  if (raw.bin_width_ticks != acc.bin_width_ticks ||
      raw.t_min_ticks != acc.t_min_ticks || raw.bins() != acc.values.size())
    throw std::invalid_argument("normalize_g2: histogram grids differ");

  NormalizedG2 g2;
  g2.n_triggers = raw.n_triggers;
  const std::size_t n = raw.bins();
  g2.centers_ns.resize(n);
  g2.values.resize(n);
  g2.errors.resize(n);
  g2.undefined.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    g2.centers_ns[k] = raw.bin_center_ns(k);
    const double counts = static_cast<double>(raw.counts[k]);
    const double expected = acc.values[k];
    if (expected <= 0.0) {
      if (counts > 0.0)
        throw std::domain_error(
            "normalize_g2: raw counts with zero accidental estimate");
      g2.values[k] = 0.0;
      g2.errors[k] = 0.0;
      g2.undefined[k] = 1;
      continue;
    }
    if (counts == 0.0) {
      g2.values[k] = 0.0;
      g2.errors[k] = 1.0 / expected; // one-count scale upper bound
      continue;
    }
    const double value = counts / expected;
    const double rel_raw = 1.0 / counts;
    const double rel_acc = acc.variances[k] / (expected * expected);
    const double rel2 = rel_raw + (rel_acc > 0.1 * rel_raw ? rel_acc : 0.0);
    g2.values[k] = value;
    g2.errors[k] = value * std::sqrt(rel2);
  }
  return g2;
}

double heralding_efficiency(const TagStream& s, const TagStream& i,
                            double window_ns, double duration_ns) {
  require_sorted(s, "s");
  require_sorted(i, "i");
  if (s.empty())
    throw std::invalid_argument("heralding_efficiency: no heralds");
  const std::int64_t window = to_ticks_checked(window_ns, "window");
  if (window <= 0)
    throw std::invalid_argument("heralding_efficiency: window must be > 0");
  if (i.empty()) return 0.0;

  std::uint64_t coincident = 0;
  std::size_t p = 0;
  for (const std::uint64_t ts : s.ticks) {
    while (p < i.size() && i.ticks[p] < ts) ++p;
    if (p < i.size() &&
        as_signed(i.ticks[p]) < as_signed(ts) + window)
      ++coincident;
  }

  if (duration_ns <= 0.0) {
    const std::uint64_t first = std::min(s.ticks.front(), i.ticks.front());
    const std::uint64_t last = std::max(s.ticks.back(), i.ticks.back());
    duration_ns = ticks_to_ns(last - first);
  }
  const double n_heralds = static_cast<double>(s.size());
  double eff = static_cast<double>(coincident) / n_heralds;
  if (duration_ns > 0.0) {
    const double idler_rate = static_cast<double>(i.size()) / duration_ns;
    eff -= idler_rate * window_ns;
  }
  return std::clamp(eff, 0.0, 1.0);
}

} // namespace cpl
