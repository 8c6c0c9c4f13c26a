#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include "cpl/correlation.hpp"
#include "cpl/expfit.hpp"
#include "cpl/homodyne.hpp"
#include "cpl/tagio.hpp"

namespace cpl {

/// FNV-1a 64-bit hash, hex-encoded; identifies config file contents in run
/// manifests.
std::string content_hash(std::string_view text);

/// Flat key=value run record written next to every output set. Identical
/// manifests imply byte-identical data outputs.
struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::string config_hash;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<std::pair<std::string, std::string>> extra;

  /// Writes manifest.txt into out_dir (also recorded as the `out` field).
  void write(const std::filesystem::path& out_dir) const;
};

// ---------------------------------------------------------------------------
// simulate: streaming event generation -> detectors -> splitter -> tag file
//
// Channel layout in the output file: 0 carries the unsplit (herald) channel,
// 1 and 2 the two splitter arms. Which physical channel is split is set by
// the config's split_channel.
// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::string config_text;
  std::string config_path; // recorded in the manifest
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  unsigned threads = 1;
};

struct SimulateResult {
  std::filesystem::path tags_path;
  std::uint64_t n_herald_tags = 0;
  std::uint64_t n_arm1_tags = 0;
  std::uint64_t n_arm2_tags = 0;
  double duration_s = 0.0;
};

SimulateResult run_simulate(const SimulateOptions& opts);

// ---------------------------------------------------------------------------
// hbt: conditional correlation pipeline on a recorded tag file
// ---------------------------------------------------------------------------

struct HbtOptions {
  std::filesystem::path tags_path;
  double window_ns = 30.0;
  double bin_width_ns = 2.0;
  double range_ns = 30.0; // g2 grid covers centers in [-range, +range]
  std::uint8_t herald_channel = 0;
  std::uint8_t arm1_channel = 1;
  std::uint8_t arm2_channel = 2;
  std::filesystem::path out_dir;
  unsigned threads = 1;
};

struct HbtResult {
  NormalizedG2 g2;
  double g2_zero = 0.0;
  double g2_zero_error = 0.0;
  double g2_min = 0.0;
  double g2_min_center_ns = 0.0;
  double heralding_efficiency = 0.0;
  std::uint64_t n_heralds = 0;
  std::filesystem::path g2_csv;
  std::filesystem::path raw_csv;
  std::filesystem::path summary_path;
};

HbtResult run_hbt(const HbtOptions& opts);

// ---------------------------------------------------------------------------
// homodyne: triggered trace synthesis -> shot-noise-normalized variance ->
// envelope fit
// ---------------------------------------------------------------------------

struct HomodyneOptions {
  std::string config_text;
  std::string config_path;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  unsigned threads = 1;
};

struct HomodyneResult {
  VarianceEnvelope variance; // rebinned as configured
  ExpFitResult fit;
  ExpModel model = ExpModel::Decay;
  double fit_guard_ns = 0.0;
  std::size_t peak_index = 0;       // argmax of the variance envelope
  std::int64_t peak_offset_samples = 0; // peak index minus trigger index
  std::filesystem::path variance_csv;
  std::filesystem::path fit_csv;
  std::filesystem::path report_path;
};

HomodyneResult run_homodyne(const HomodyneOptions& opts);

// ---------------------------------------------------------------------------
// fit: standalone refit of an exported envelope CSV
// ---------------------------------------------------------------------------

struct FitOptions {
  std::filesystem::path csv_path;
  ExpModel model = ExpModel::Decay;
  bool fix_t0 = true;
  double t0_ns = 0.0;
  bool fix_baseline = false;
  double baseline = 1.0;
  double guard_ns = 0.0; // exclude |x - t0| < guard
  std::filesystem::path out_dir;
};

struct FitResult {
  ExpFitResult fit;
  std::filesystem::path fit_csv;
  std::filesystem::path report_path;
};

FitResult run_fit(const FitOptions& opts);

// ---------------------------------------------------------------------------

enum ExitCode {
  kExitOk = 0,
  kExitConfig = 2,
  kExitIo = 3,
  kExitNumerical = 4,
};

/// Maps the library's exception types onto the documented process exit
/// codes, printing the message to stderr.
int run_with_exit_code(const std::function<void()>& body);

} // namespace cpl
