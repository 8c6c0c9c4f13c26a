#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "cpl/pipeline.hpp"

using namespace cpl;
namespace fs = std::filesystem;

namespace {

fs::path temp_root() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "cpl_pipeline_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const char* kSmallConfig =
    "pair_rate = 5e4\n"
    "tau_ns = 7.2\n"
    "duration_s = 4\n"
    "background_rate_idler = 1e5\n"
    "signal_efficiency = 0.5\n"
    "idler_efficiency = 0.13\n"
    "dark_rate_signal = 100\n"
    "dark_rate_idler = 240\n"
    "jitter_sigma_ps = 424\n";

} // namespace

TEST_CASE("simulate: tag rates follow the configured chain") {
  SimulateOptions opts;
  opts.config_text = kSmallConfig;
  opts.seed = 42;
  opts.out_dir = temp_root() / "sim_rates";
  opts.threads = 2;
  const SimulateResult r = run_simulate(opts);

  // herald channel: pair_rate * signal_efficiency + dark
  const double expected_heralds = (5e4 * 0.5 + 100.0) * 4.0;
  CHECK(std::fabs(static_cast<double>(r.n_herald_tags) - expected_heralds) <
        5.0 * std::sqrt(expected_heralds));
  // split channel total: (pairs + background) * idler_efficiency + dark
  const double expected_split = ((5e4 + 1e5) * 0.13 + 240.0) * 4.0;
  const double split_total =
      static_cast<double>(r.n_arm1_tags + r.n_arm2_tags);
  CHECK(std::fabs(split_total - expected_split) < 5.0 * std::sqrt(expected_split));
  // balanced arms
  CHECK(std::fabs(static_cast<double>(r.n_arm1_tags) - split_total / 2.0) <
        5.0 * std::sqrt(split_total / 4.0));

  // the tag file itself round-trips through the reader
  const auto streams = read_tags(r.tags_path);
  REQUIRE(streams.size() == 3);
  CHECK(streams[0].size() == r.n_herald_tags);
  CHECK(streams[1].size() == r.n_arm1_tags);
  CHECK(streams[2].size() == r.n_arm2_tags);
  CHECK(fs::exists(opts.out_dir / "manifest.txt"));
}

TEST_CASE("simulate: byte-identical outputs for 1, 2, 8 threads") {
  std::vector<std::vector<char>> bytes;
  for (const unsigned threads : {1u, 2u, 8u}) {
    SimulateOptions opts;
    opts.config_text = kSmallConfig;
    opts.seed = 7;
    opts.out_dir = temp_root() / ("sim_threads_" + std::to_string(threads));
    opts.threads = threads;
    const SimulateResult r = run_simulate(opts);
    bytes.push_back(slurp(r.tags_path));
  }
  CHECK(bytes[0] == bytes[1]);
  CHECK(bytes[0] == bytes[2]);
}

TEST_CASE("simulate: zero-rate config gives an empty but valid tag file") {
  SimulateOptions opts;
  opts.config_text = "pair_rate = 0\nduration_s = 1\n"
                     "dark_rate_signal = 0\ndark_rate_idler = 0\n"
                     "background_rate_idler = 0\n";
  opts.seed = 1;
  opts.out_dir = temp_root() / "sim_zero";
  const SimulateResult r = run_simulate(opts);
  CHECK(r.n_herald_tags == 0);
  CHECK(r.n_arm1_tags == 0);
  CHECK(r.n_arm2_tags == 0);
  const auto streams = read_tags(r.tags_path);
  REQUIRE(streams.size() == 3);
  for (const auto& s : streams) CHECK(s.empty());
}

TEST_CASE("simulate: missing duration is a config error") {
  SimulateOptions opts;
  opts.config_text = "pair_rate = 1e4\n";
  opts.seed = 1;
  opts.out_dir = temp_root() / "sim_missing";
  CHECK_THROWS_AS(run_simulate(opts), ConfigError);
}

TEST_CASE("hbt pipeline on simulated data shows antibunching") {
  SimulateOptions sim;
  sim.config_text =
      "pair_rate = 1e5\n"
      "tau_ns = 7.2\n"
      "duration_s = 20\n"
      "background_rate_idler = 5e5\n"
      "signal_efficiency = 0.5\n"
      "idler_efficiency = 0.13\n"
      "dark_rate_signal = 100\n"
      "dark_rate_idler = 240\n"
      "jitter_sigma_ps = 424\n";
  sim.seed = 11;
  sim.out_dir = temp_root() / "hbt_sim";
  sim.threads = 2;
  const SimulateResult sr = run_simulate(sim);

  HbtOptions opts;
  opts.tags_path = sr.tags_path;
  opts.out_dir = temp_root() / "hbt_out";
  opts.threads = 2;
  const HbtResult r = run_hbt(opts);

  CHECK(r.g2_zero < 0.5); // strong antibunching even at modest statistics
  CHECK(r.g2_zero_error > 0.0);
  CHECK(r.heralding_efficiency > 0.10);
  CHECK(r.heralding_efficiency < 0.16);
  CHECK(fs::exists(r.g2_csv));
  CHECK(fs::exists(r.raw_csv));
  CHECK(fs::exists(r.summary_path));

  // grid symmetric around a center bin at exactly 0
  const std::size_t mid = r.g2.values.size() / 2;
  CHECK(r.g2.centers_ns[mid] == doctest::Approx(0.0));
}

TEST_CASE("hbt rejects missing channels") {
  TagStream only;
  only.channel = 0;
  only.ticks = {100, 200};
  const fs::path tags = temp_root() / "single_channel.cptag";
  write_tags(tags, std::span<const TagStream>{&only, 1});
  HbtOptions opts;
  opts.tags_path = tags;
  opts.out_dir = temp_root() / "hbt_bad";
  CHECK_THROWS_AS(run_hbt(opts), ConfigError);
}

TEST_CASE("homodyne pipeline: decay fit and reproducible refit") {
  HomodyneOptions opts;
  opts.config_text =
      "tau_ns = 7.2\n"
      "eta = 0.13\n"
      "mode_match = 1.0\n"
      "n_traces = 60000\n"
      "trace_length = 280\n"
      "trigger_index = 56\n"
      "envelope = decay\n";
  opts.seed = 21;
  opts.out_dir = temp_root() / "hom_decay";
  opts.threads = 2;
  const HomodyneResult r = run_homodyne(opts);

  CHECK(r.fit.converged);
  CHECK(r.fit.tau > 4.0);
  CHECK(r.fit.tau < 11.0);
  CHECK(r.fit.amplitude > 0.0);
  CHECK(fs::exists(r.variance_csv));
  CHECK(fs::exists(r.fit_csv));
  CHECK(fs::exists(r.report_path));

  // a standalone refit of the exported envelope reproduces the fit exactly
  FitOptions fit_opts;
  fit_opts.csv_path = r.variance_csv;
  fit_opts.model = ExpModel::Decay;
  fit_opts.t0_ns = 0.0;
  fit_opts.guard_ns = r.fit_guard_ns;
  fit_opts.out_dir = temp_root() / "hom_refit";
  const FitResult refit = run_fit(fit_opts);
  // CSV stores %.10g, so agreement is to the printed precision
  CHECK(refit.fit.tau == doctest::Approx(r.fit.tau).epsilon(1e-8));
  CHECK(refit.fit.amplitude == doctest::Approx(r.fit.amplitude).epsilon(1e-8));
  CHECK(refit.fit.baseline == doctest::Approx(r.fit.baseline).epsilon(1e-8));
}

TEST_CASE("homodyne pipeline: eta 0 fits an amplitude consistent with zero") {
  HomodyneOptions opts;
  opts.config_text =
      "tau_ns = 7.2\n"
      "eta = 0\n"
      "n_traces = 30000\n"
      "trace_length = 200\n"
      "trigger_index = 40\n";
  opts.seed = 5;
  opts.out_dir = temp_root() / "hom_vacuum";
  opts.threads = 2;
  const HomodyneResult r = run_homodyne(opts);
  CHECK(std::fabs(r.fit.amplitude) < 5.0 * std::max(r.fit.amplitude_err, 1e-4));
}

TEST_CASE("homodyne pipeline: byte-identical variance across thread counts") {
  std::vector<std::vector<char>> bytes;
  for (const unsigned threads : {1u, 2u, 8u}) {
    HomodyneOptions opts;
    opts.config_text =
        "tau_ns = 7.2\neta = 0.13\nn_traces = 9000\n"
        "trace_length = 160\ntrigger_index = 32\n";
    opts.seed = 3;
    opts.out_dir = temp_root() / ("hom_threads_" + std::to_string(threads));
    opts.threads = threads;
    const HomodyneResult r = run_homodyne(opts);
    bytes.push_back(slurp(r.variance_csv));
  }
  CHECK(bytes[0] == bytes[1]);
  CHECK(bytes[0] == bytes[2]);
}

TEST_CASE("fit command: synthetic csv recovers known parameters") {
  const fs::path csv = temp_root() / "synthetic.csv";
  {
    std::ofstream out(csv);
    out.precision(17);
    out << "time_ns,value,error\n";
    for (double t = -10.0; t < 60.0; t += 0.5) {
      const double v =
          exp_model_value(ExpModel::Decay, t, 0.05, 6.5, 1.0, 0.0);
      out << t << "," << v << ",0.001\n";
    }
  }
  FitOptions opts;
  opts.csv_path = csv;
  opts.model = ExpModel::Decay;
  opts.out_dir = temp_root() / "fit_out";
  const FitResult r = run_fit(opts);
  CHECK(r.fit.converged);
  CHECK(r.fit.tau == doctest::Approx(6.5).epsilon(1e-6));
  CHECK(r.fit.amplitude == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("fit command: malformed csv raises a config error") {
  const fs::path csv = temp_root() / "broken.csv";
  {
    std::ofstream out(csv);
    out << "time_ns,value,error\nnot,numbers,here,at,all\n";
  }
  FitOptions opts;
  opts.csv_path = csv;
  opts.out_dir = temp_root() / "fit_bad";
  CHECK_THROWS_AS(run_fit(opts), ConfigError);
}

TEST_CASE("manifest records the run parameters") {
  SimulateOptions opts;
  opts.config_text = "pair_rate = 0\nduration_s = 1\n"
                     "dark_rate_signal = 0\ndark_rate_idler = 0\n";
  opts.config_path = "inline.cfg";
  opts.seed = 99;
  opts.out_dir = temp_root() / "manifest_check";
  opts.threads = 3;
  run_simulate(opts);
  const auto bytes = slurp(opts.out_dir / "manifest.txt");
  const std::string text(bytes.begin(), bytes.end());
  CHECK(text.find("subcommand = simulate") != std::string::npos);
  CHECK(text.find("seed = 99") != std::string::npos);
  CHECK(text.find("config_hash = " + content_hash(opts.config_text)) !=
        std::string::npos);
  CHECK(text.find("config_path = inline.cfg") != std::string::npos);
}

TEST_CASE("exit code mapping") {
  CHECK(run_with_exit_code([] {}) == kExitOk);
  CHECK(run_with_exit_code([] { throw ConfigError(3, "bad"); }) == kExitConfig);
  CHECK(run_with_exit_code([] {
          throw TagIoError(TagIoErrc::BadMagic, "nope");
        }) == kExitIo);
  CHECK(run_with_exit_code([] { throw std::domain_error("singular"); }) ==
        kExitNumerical);
  CHECK(run_with_exit_code([] { throw std::invalid_argument("arg"); }) ==
        kExitConfig);
}
