#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cpl {

enum class ExpModel { Decay, Rise };

/// Piecewise-exponential model value.
///   Decay: b + A*exp(-(t-t0)/tau) for t >= t0, b otherwise
///   Rise:  b + A*exp(+(t-t0)/tau) for t <= t0, b otherwise
double exp_model_value(ExpModel model, double t, double amplitude, double tau,
                       double baseline, double t0);

struct ExpFitOptions {
  ExpModel model = ExpModel::Decay;
  bool fix_t0 = true;       // t0 fixed at `t0` (trigger time) by default
  double t0 = 0.0;
  bool fix_baseline = false; // optionally pin the baseline (e.g. at 1.0)
  double baseline = 0.0;
  int max_iterations = 200;
  double step_tolerance = 1e-10;     // relative parameter change
  double gradient_tolerance = 1e-12; // inf-norm of the weighted gradient
};

struct InitialGuess {
  double amplitude = 0.0;
  double tau = 1.0;
  double baseline = 0.0;
  bool used_fallback_tau = false; // too few usable points: tau = span/5
};

/// Parameter order in `covariance` is the free-parameter subset of
/// [amplitude, tau, baseline, t0]; `param_names` lists it explicitly.
struct ExpFitResult {
  double amplitude = 0.0;
  double tau = 0.0;
  double baseline = 0.0;
  double t0 = 0.0;
  double amplitude_err = 0.0;
  double tau_err = 0.0;
  double baseline_err = 0.0;
  double t0_err = 0.0;
  std::vector<double> covariance;       // row-major n_free x n_free, chi2-scaled
  std::vector<std::string> param_names;
  double chi2 = 0.0;
  double chi2_reduced = 0.0;
  std::size_t n_points = 0;
  int iterations = 0;
  bool converged = false;
  bool tau_unidentifiable = false;
};

/// Weighted least-squares fit of the exponential model, Levenberg-Marquardt
/// on a Gauss-Newton step with the analytic Jacobian.
///
/// Points with sigma == 0 are dropped; at least 4 weighted points must
/// remain. Degenerate data (all y identical) short-circuits to amplitude 0
/// with tau flagged unidentifiable.
ExpFitResult fit_exp(std::span<const double> x, std::span<const double> y,
                     std::span<const double> sigma, const ExpFitOptions& opts);

/// Data-driven starting point: baseline from the median of the flat side,
/// tau from a log-linear regression of the positive residuals, amplitude
/// from the peak above baseline.
InitialGuess initial_guess(std::span<const double> x, std::span<const double> y,
                           ExpModel model, double t0);

/// Human-readable fit report (parameter +- error lines and chi2/dof).
std::string format_fit_report(const ExpFitResult& fit, ExpModel model);

} // namespace cpl
