// Command-line front end: simulate / hbt / homodyne / fit subcommands
// wiring the library pipelines into reproducible runs.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cpl/pipeline.hpp"
#include "cpl/version.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw cpl::TagIoError(cpl::TagIoErrc::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"cascade photon-pair source simulator and time-tag analysis"};
  app.set_version_flag("--version", std::string("cpl ") + cpl::kVersion);
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "generate truth events, apply detectors and splitter, "
                  "write a multi-channel tag file");
  std::string sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  unsigned sim_threads = 1;
  simulate->add_option("--config", sim_config, "run configuration file")
      ->required();
  simulate->add_option("--seed", sim_seed, "RNG seed (required: no silent entropy)")
      ->required();
  simulate->add_option("--out", sim_out, "output directory")->required();
  simulate->add_option("--threads", sim_threads, "worker threads");

  // hbt
  auto* hbt = app.add_subcommand(
      "hbt", "conditional correlation pipeline on a recorded tag file");
  std::string hbt_tags, hbt_out;
  double hbt_window = 30.0, hbt_bins = 2.0, hbt_range = 30.0;
  unsigned hbt_threads = 1;
  std::uint32_t hbt_herald = 0, hbt_arm1 = 1, hbt_arm2 = 2;
  hbt->add_option("--tags", hbt_tags, "input tag file")->required();
  hbt->add_option("--out", hbt_out, "output directory")->required();
  hbt->add_option("--window-ns", hbt_window, "coincidence window Tc (ns)");
  hbt->add_option("--bins", hbt_bins, "bin width (ns)");
  hbt->add_option("--range-ns", hbt_range, "g2 half-range (ns)");
  hbt->add_option("--herald-channel", hbt_herald, "herald channel id");
  hbt->add_option("--arm1-channel", hbt_arm1, "first splitter arm channel id");
  hbt->add_option("--arm2-channel", hbt_arm2, "second splitter arm channel id");
  hbt->add_option("--threads", hbt_threads, "worker threads");

  // homodyne
  auto* homodyne = app.add_subcommand(
      "homodyne", "synthesize triggered quadrature traces, write the "
                  "shot-noise-normalized variance and its envelope fit");
  std::string hom_config, hom_out;
  std::uint64_t hom_seed = 0;
  unsigned hom_threads = 1;
  homodyne->add_option("--config", hom_config, "run configuration file")
      ->required();
  homodyne->add_option("--seed", hom_seed, "RNG seed (required: no silent entropy)")
      ->required();
  homodyne->add_option("--out", hom_out, "output directory")->required();
  homodyne->add_option("--threads", hom_threads, "worker threads");

  // fit
  auto* fit = app.add_subcommand(
      "fit", "standalone exponential fit of an exported envelope CSV");
  std::string fit_input, fit_out, fit_model = "decay";
  double fit_t0 = 0.0, fit_guard = 0.0, fit_baseline = 1.0;
  bool fit_free_t0 = false, fit_pin_baseline = false;
  fit->add_option("--input", fit_input, "CSV with x,y,error columns")->required();
  fit->add_option("--out", fit_out, "output directory")->required();
  fit->add_option("--model", fit_model, "decay | rise")
      ->check(CLI::IsMember({"decay", "rise"}));
  fit->add_option("--t0", fit_t0, "edge time (ns)");
  fit->add_flag("--free-t0", fit_free_t0, "float t0 instead of fixing it");
  fit->add_option("--guard-ns", fit_guard, "exclude |x - t0| below this");
  fit->add_flag("--pin-baseline", fit_pin_baseline, "fix the baseline");
  fit->add_option("--baseline", fit_baseline, "pinned baseline value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2; // usage problems are configuration errors
  }

  if (simulate->parsed()) {
    return cpl::run_with_exit_code([&] {
      cpl::SimulateOptions opts;
      opts.config_text = read_file(sim_config);
      opts.config_path = sim_config;
      opts.seed = sim_seed;
      opts.out_dir = sim_out;
      opts.threads = sim_threads;
      const cpl::SimulateResult r = cpl::run_simulate(opts);
      std::printf("tags: %s\n", r.tags_path.c_str());
      std::printf("herald tags: %llu (%.1f /s)\n",
                  static_cast<unsigned long long>(r.n_herald_tags),
                  static_cast<double>(r.n_herald_tags) / r.duration_s);
      std::printf("arm tags: %llu + %llu\n",
                  static_cast<unsigned long long>(r.n_arm1_tags),
                  static_cast<unsigned long long>(r.n_arm2_tags));
    });
  }
  if (hbt->parsed()) {
    return cpl::run_with_exit_code([&] {
      cpl::HbtOptions opts;
      opts.tags_path = hbt_tags;
      opts.out_dir = hbt_out;
      opts.window_ns = hbt_window;
      opts.bin_width_ns = hbt_bins;
      opts.range_ns = hbt_range;
      opts.herald_channel = static_cast<std::uint8_t>(hbt_herald);
      opts.arm1_channel = static_cast<std::uint8_t>(hbt_arm1);
      opts.arm2_channel = static_cast<std::uint8_t>(hbt_arm2);
      opts.threads = hbt_threads;
      const cpl::HbtResult r = cpl::run_hbt(opts);
      std::printf("g2(0) = %.4g +- %.2g\n", r.g2_zero, r.g2_zero_error);
      std::printf("g2 min = %.4g at %.1f ns\n", r.g2_min, r.g2_min_center_ns);
      std::printf("heralding efficiency = %.4g\n", r.heralding_efficiency);
    });
  }
  if (homodyne->parsed()) {
    return cpl::run_with_exit_code([&] {
      cpl::HomodyneOptions opts;
      opts.config_text = read_file(hom_config);
      opts.config_path = hom_config;
      opts.seed = hom_seed;
      opts.out_dir = hom_out;
      opts.threads = hom_threads;
      const cpl::HomodyneResult r = cpl::run_homodyne(opts);
      std::printf("tau = %.4g +- %.2g ns (%s)\n", r.fit.tau, r.fit.tau_err,
                  r.fit.converged ? "converged" : "not converged");
      std::printf("peak offset = %lld samples\n",
                  static_cast<long long>(r.peak_offset_samples));
    });
  }
  if (fit->parsed()) {
    return cpl::run_with_exit_code([&] {
      cpl::FitOptions opts;
      opts.csv_path = fit_input;
      opts.model = fit_model == "rise" ? cpl::ExpModel::Rise
                                       : cpl::ExpModel::Decay;
      opts.fix_t0 = !fit_free_t0;
      opts.t0_ns = fit_t0;
      opts.fix_baseline = fit_pin_baseline;
      opts.baseline = fit_baseline;
      opts.guard_ns = fit_guard;
      opts.out_dir = fit_out;
      const cpl::FitResult r = cpl::run_fit(opts);
      std::printf("tau = %.6g +- %.2g ns\n", r.fit.tau, r.fit.tau_err);
      std::printf("amplitude = %.6g +- %.2g\n", r.fit.amplitude,
                  r.fit.amplitude_err);
    });
  }
  return 0;
}
