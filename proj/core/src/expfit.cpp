#include "cpl/expfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace cpl {

namespace {

constexpr int kMaxParams = 4; // amplitude, tau, baseline, t0

struct Point {
  double x, y, w; // w = 1/sigma
};

// Model value and analytic derivatives w.r.t. [A, tau, b, t0].
void model_eval(ExpModel model, double t, const double p[kMaxParams],
                double* value, double deriv[kMaxParams]) {
  const double amp = p[0], tau = p[1], base = p[2], t0 = p[3];
  const double dt = t - t0;
  const bool on_support =
      model == ExpModel::Decay ? (dt >= 0.0) : (dt <= 0.0);
  if (!on_support) {
    *value = base;
    if (deriv) {
      deriv[0] = deriv[1] = deriv[3] = 0.0;
      deriv[2] = 1.0;
    }
    return;
  }
  const double sign = model == ExpModel::Decay ? -1.0 : 1.0;
  const double e = std::exp(sign * dt / tau);
  *value = base + amp * e;
  if (deriv) {
    deriv[0] = e;
    deriv[1] = -sign * amp * e * dt / (tau * tau);
    deriv[2] = 1.0;
    deriv[3] = -sign * amp * e / tau;
  }
}

double chi_square(ExpModel model, const std::vector<Point>& pts,
                  const double p[kMaxParams]) {
  double chi2 = 0.0;
  for (const auto& pt : pts) {
    double f;
    model_eval(model, pt.x, p, &f, nullptr);
    const double r = (pt.y - f) * pt.w;
    chi2 += r * r;
  }
  return chi2;
}

// Gaussian elimination with partial pivoting; a is n x n row-major,
// overwritten. Returns false if singular.
bool solve_linear(int n, std::vector<double>& a, std::vector<double>& b) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    if (std::fabs(a[pivot * n + col]) < 1e-300) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
  return true;
}

// Inverse of symmetric positive (semi)definite n x n matrix via
// Gauss-Jordan; returns false on singularity.
bool invert_matrix(int n, std::vector<double> a, std::vector<double>& inv) {
  inv.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    if (std::fabs(a[pivot * n + col]) < 1e-300) return false;
    if (pivot != col)
      for (int c = 0; c < n; ++c) {
        std::swap(a[col * n + c], a[pivot * n + c]);
        std::swap(inv[col * n + c], inv[pivot * n + c]);
      }
    const double d = 1.0 / a[col * n + col];
    for (int c = 0; c < n; ++c) {
      a[col * n + c] *= d;
      inv[col * n + c] *= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col];
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        a[r * n + c] -= f * a[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }
  return true;
}

} // namespace

double exp_model_value(ExpModel model, double t, double amplitude, double tau,
                       double baseline, double t0) {
  const double p[kMaxParams] = {amplitude, tau, baseline, t0};
  double v;
  model_eval(model, t, p, &v, nullptr);
  return v;
}

InitialGuess initial_guess(std::span<const double> x, std::span<const double> y,
                           ExpModel model, double t0) {
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("initial_guess: mismatched or empty data");
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  const double span = x[order.back()] - x[order.front()];

  // Baseline from the side far from the exponential edge.
  const std::size_t quarter = std::max<std::size_t>(1, n / 4);
  std::vector<double> flat;
  flat.reserve(quarter);
  for (std::size_t k = 0; k < quarter; ++k) {
    const std::size_t idx =
        model == ExpModel::Decay ? order[n - 1 - k] : order[k];
    flat.push_back(y[idx]);
  }
  std::sort(flat.begin(), flat.end());
  const double baseline = flat.size() % 2 == 1
                              ? flat[flat.size() / 2]
                              : 0.5 * (flat[flat.size() / 2 - 1] +
                                       flat[flat.size() / 2]);

  InitialGuess guess;
  guess.baseline = baseline;

  // Log-linear regression of positive residuals on the support side.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = x[i] - t0;
    const bool on_support = model == ExpModel::Decay ? dt >= 0 : dt <= 0;
    if (!on_support) continue;
    const double z = y[i] - baseline;
    peak = std::max(peak, z);
    if (z <= 0.0) continue;
    const double lz = std::log(z);
    sx += dt;
    sy += lz;
    sxx += dt * dt;
    sxy += dt * lz;
    ++m;
  }
  guess.amplitude = peak;

  bool fallback = true;
  if (m >= 2) {
    const double denom = m * sxx - sx * sx;
    if (std::fabs(denom) > 0.0) {
      const double slope = (m * sxy - sx * sy) / denom;
      const double tau = model == ExpModel::Decay ? -1.0 / slope : 1.0 / slope;
      if (std::isfinite(tau) && tau > 0.0) {
        guess.tau = tau;
        fallback = false;
      }
    }
  }
  if (fallback) {
    guess.tau = span > 0.0 ? span / 5.0 : 1.0;
    guess.used_fallback_tau = true;
  }
  return guess;
}

ExpFitResult fit_exp(std::span<const double> x, std::span<const double> y,
                     std::span<const double> sigma, const ExpFitOptions& opts) {
  if (x.size() != y.size() || x.size() != sigma.size())
    throw std::invalid_argument("fit_exp: mismatched input lengths");

  std::vector<Point> pts;
  pts.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || !std::isfinite(sigma[i]))
      throw std::invalid_argument("fit_exp: non-finite input");
    if (sigma[i] < 0.0)
      throw std::invalid_argument("fit_exp: negative sigma");
    if (sigma[i] == 0.0) continue; // rejected rather than infinitely weighted
    pts.push_back({x[i], y[i], 1.0 / sigma[i]});
  }
  if (pts.size() < 4)
    throw std::invalid_argument("fit_exp: need at least 4 points with sigma > 0");

  ExpFitResult result;
  result.n_points = pts.size();

  // Degenerate data: flat in y. Amplitude 0, tau meaningless.
  const auto [ymin_it, ymax_it] = std::minmax_element(
      pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.y < b.y; });
  if (ymin_it->y == ymax_it->y) {
    const auto [xmin_it, xmax_it] = std::minmax_element(
        pts.begin(), pts.end(),
        [](const Point& a, const Point& b) { return a.x < b.x; });
    result.amplitude = 0.0;
    result.baseline = opts.fix_baseline ? opts.baseline : ymin_it->y;
    result.tau = (xmax_it->x - xmin_it->x) / 5.0;
    if (result.tau <= 0.0) result.tau = 1.0;
    result.t0 = opts.t0;
    result.tau_unidentifiable = true;
    result.converged = true;
    const double p[kMaxParams] = {result.amplitude, result.tau, result.baseline,
                                  result.t0};
    result.chi2 = chi_square(opts.model, pts, p);
    return result;
  }

  // Free-parameter bookkeeping over [A, tau, b, t0].
  bool free_mask[kMaxParams] = {true, true, !opts.fix_baseline, !opts.fix_t0};
  std::vector<int> free_idx;
  for (int k = 0; k < kMaxParams; ++k)
    if (free_mask[k]) free_idx.push_back(k);
  const int nf = static_cast<int>(free_idx.size());

  double params[kMaxParams];
  {
    const InitialGuess g = initial_guess(x, y, opts.model, opts.t0);
    params[0] = g.amplitude;
    params[1] = g.tau;
    params[2] = opts.fix_baseline ? opts.baseline : g.baseline;
    params[3] = opts.t0;
    if (params[1] <= 0.0) params[1] = 1.0;
  }

  // The edge position has a one-sided gradient (off-support points carry
  // none), so a free t0 needs a coarse profiled scan before the descent.
  if (!opts.fix_t0) {
    const auto [xmin_it, xmax_it] = std::minmax_element(
        pts.begin(), pts.end(),
        [](const Point& a, const Point& b) { return a.x < b.x; });
    const int n_scan = 128;
    double best_chi2 = std::numeric_limits<double>::infinity();
    for (int k = -1; k < n_scan; ++k) {
      const double t0_cand =
          k < 0 ? opts.t0
                : xmin_it->x + (xmax_it->x - xmin_it->x) *
                                   (static_cast<double>(k) + 0.5) / n_scan;
      const InitialGuess g = initial_guess(x, y, opts.model, t0_cand);
      double trial[kMaxParams] = {
          g.amplitude, g.tau > 0.0 ? g.tau : 1.0,
          opts.fix_baseline ? opts.baseline : g.baseline, t0_cand};
      const double c = chi_square(opts.model, pts, trial);
      if (c < best_chi2) {
        best_chi2 = c;
        std::copy(trial, trial + kMaxParams, params);
      }
    }
  }

  const std::size_t np = pts.size();
  std::vector<double> jac(np * nf);
  std::vector<double> res(np);

  auto build_system = [&](const double p[kMaxParams], std::vector<double>& nrm,
                          std::vector<double>& grad) {
    double chi2 = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
      double f, d[kMaxParams];
      model_eval(opts.model, pts[i].x, p, &f, d);
      res[i] = (pts[i].y - f) * pts[i].w;
      chi2 += res[i] * res[i];
      for (int k = 0; k < nf; ++k) jac[i * nf + k] = d[free_idx[k]] * pts[i].w;
    }
    nrm.assign(static_cast<std::size_t>(nf) * nf, 0.0);
    grad.assign(nf, 0.0);
    for (std::size_t i = 0; i < np; ++i) {
      for (int k = 0; k < nf; ++k) {
        grad[k] += jac[i * nf + k] * res[i];
        for (int l = k; l < nf; ++l)
          nrm[k * nf + l] += jac[i * nf + k] * jac[i * nf + l];
      }
    }
    for (int k = 0; k < nf; ++k)
      for (int l = 0; l < k; ++l) nrm[k * nf + l] = nrm[l * nf + k];
    return chi2;
  };

  std::vector<double> normal, gradient;
  double chi2 = build_system(params, normal, gradient);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;

  for (; iter < opts.max_iterations && !converged; ++iter) {
    double grad_inf = 0.0;
    for (double g : gradient) grad_inf = std::max(grad_inf, std::fabs(g));
    if (grad_inf < opts.gradient_tolerance) {
      converged = true;
      break;
    }

    bool stepped = false;
    while (lambda < 1e14) {
      std::vector<double> damped = normal;
      for (int k = 0; k < nf; ++k) {
        const double d = normal[k * nf + k];
        damped[k * nf + k] = d + lambda * (d > 0.0 ? d : 1.0);
      }
      std::vector<double> delta = gradient;
      if (!solve_linear(nf, damped, delta)) {
        lambda *= 10.0;
        continue;
      }
      double trial[kMaxParams];
      std::copy(params, params + kMaxParams, trial);
      for (int k = 0; k < nf; ++k) trial[free_idx[k]] += delta[k];
      if (trial[1] <= 0.0) { // tau must stay positive
        lambda *= 10.0;
        continue;
      }
      const double trial_chi2 = chi_square(opts.model, pts, trial);
      if (trial_chi2 <= chi2) {
        double max_rel = 0.0;
        for (int k = 0; k < nf; ++k) {
          const double scale = std::max(std::fabs(params[free_idx[k]]), 1e-30);
          max_rel = std::max(max_rel, std::fabs(delta[k]) / scale);
        }
        std::copy(trial, trial + kMaxParams, params);
        chi2 = build_system(params, normal, gradient);
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (max_rel < opts.step_tolerance) converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!stepped) break; // damping exhausted
  }

  result.amplitude = params[0];
  result.tau = params[1];
  result.baseline = params[2];
  result.t0 = params[3];
  result.chi2 = chi2;
  result.iterations = iter;
  result.converged = converged;

  const std::size_t dof = np > static_cast<std::size_t>(nf)
                              ? np - static_cast<std::size_t>(nf)
                              : 0;
  result.chi2_reduced = dof > 0 ? chi2 / static_cast<double>(dof) : 0.0;

  static const char* kNames[kMaxParams] = {"amplitude", "tau", "baseline", "t0"};
  for (int k = 0; k < nf; ++k) result.param_names.emplace_back(kNames[free_idx[k]]);

  std::vector<double> cov;
  if (invert_matrix(nf, normal, cov)) {
    const double scale = dof > 0 ? result.chi2_reduced : 1.0;
    for (auto& c : cov) c *= scale;
    result.covariance = cov;
    double errs[kMaxParams] = {0, 0, 0, 0};
    for (int k = 0; k < nf; ++k) {
      const double v = cov[k * nf + k];
      errs[free_idx[k]] = v > 0.0 ? std::sqrt(v) : 0.0;
    }
    result.amplitude_err = errs[0];
    result.tau_err = errs[1];
    result.baseline_err = errs[2];
    result.t0_err = errs[3];
  }
  return result;
}

std::string format_fit_report(const ExpFitResult& fit, ExpModel model) {
  char line[160];
  std::string out;
  auto add = [&](const char* fmt, auto... args) {
    std::snprintf(line, sizeof line, fmt, args...);
    out += line;
  };
  add("model        = %s\n", model == ExpModel::Decay ? "decay" : "rise");
  add("amplitude    = %.10g +- %.4g\n", fit.amplitude, fit.amplitude_err);
  add("tau_ns       = %.10g +- %.4g\n", fit.tau, fit.tau_err);
  add("baseline     = %.10g +- %.4g\n", fit.baseline, fit.baseline_err);
  add("t0_ns        = %.10g +- %.4g\n", fit.t0, fit.t0_err);
  add("chi2         = %.10g\n", fit.chi2);
  add("chi2_reduced = %.10g\n", fit.chi2_reduced);
  add("n_points     = %zu\n", fit.n_points);
  add("iterations   = %d\n", fit.iterations);
  add("converged    = %s\n", fit.converged ? "yes" : "no");
  if (fit.tau_unidentifiable) out += "tau_unidentifiable = yes\n";
  return out;
}

} // namespace cpl
