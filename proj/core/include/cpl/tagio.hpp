#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpl/correlation.hpp"
#include "cpl/expfit.hpp"
#include "cpl/homodyne.hpp"
#include "cpl/pair_source.hpp"
#include "cpl/tagstream.hpp"

namespace cpl {

// ---------------------------------------------------------------------------
// Binary tag / trace formats
//
// Tag file: 16-byte header, then 16-byte records, all little-endian.
//   header:  "CPLTAG01" | u32 tick_ps (125) | u8 channel_count | 3 zero bytes
//   record:  u64 ticks | u8 channel | 7 zero bytes
// Ticks are non-decreasing per channel. Records are globally sorted by
// (ticks, channel) when written by this library.
//
// Trace file: 32-byte header, then float32 samples, trace-major.
//   header: "CPLTRC01" | u64 sample_rate_hz | u32 trace_length |
//           u32 n_traces | u32 trigger_index | 4 zero bytes
// The file size must equal header + 4 * trace_length * n_traces exactly.
// ---------------------------------------------------------------------------

enum class TagIoErrc {
  BadMagic,
  UnsupportedResolution,
  BadHeader,
  Truncated,
  BadRecord,
  NonMonotonic,
  SizeMismatch,
  Io,
};

const char* to_string(TagIoErrc code);

class TagIoError : public std::runtime_error {
 public:
  TagIoError(TagIoErrc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  TagIoErrc code() const { return code_; }

 private:
  TagIoErrc code_;
};

inline constexpr char kTagMagic[8] = {'C', 'P', 'L', 'T', 'A', 'G', '0', '1'};
inline constexpr char kTraceMagic[8] = {'C', 'P', 'L', 'T', 'R', 'C', '0', '1'};
inline constexpr std::size_t kTagHeaderSize = 16;
inline constexpr std::size_t kTagRecordSize = 16;
inline constexpr std::size_t kTraceHeaderSize = 32;

/// Incremental tag writer for streaming pipelines. Appended tags must be
/// non-decreasing per channel; the writer enforces it.
class TagFileWriter {
 public:
  TagFileWriter(const std::filesystem::path& path, std::uint8_t channel_count);
  ~TagFileWriter();
  TagFileWriter(const TagFileWriter&) = delete;
  TagFileWriter& operator=(const TagFileWriter&) = delete;

  void append(std::uint64_t ticks, std::uint8_t channel);
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::vector<char> buffer_;
  std::vector<std::uint64_t> last_tick_;
  std::vector<bool> has_last_;
  void flush_buffer();
};

/// Writes streams as one multi-channel tag file, records merged in global
/// (ticks, channel) order.
void write_tags(const std::filesystem::path& path,
                std::span<const TagStream> streams);

/// Reads and validates a tag file; returns one stream per channel id
/// 0..channel_count-1 (possibly empty).
std::vector<TagStream> read_tags(const std::filesystem::path& path);

void write_traces(const std::filesystem::path& path, const TraceSet& traces);
TraceSet read_traces(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Run configuration: flat `key = value` lines, '#' comments.
// ---------------------------------------------------------------------------

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "config line " + std::to_string(line) +
                                          ": " + message
                                    : "config: " + message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Which detected stream is distributed onto the two counting detectors.
enum class SplitChannel { Idler, Signal };

/// Everything a pipeline run needs, with documented defaults matching the
/// reference experiment. Unknown keys, duplicates, and out-of-range values
/// are rejected with the offending line number.
struct RunConfig {
  SourceConfig source{1e5, 7.2, 1.0, 0.0, 0.0};
  bool has_duration = false; // duration_s is required only by simulation runs

  DetectorConfig detector_signal{0.5, 100.0, 424.0, 0.0};
  DetectorConfig detector_idler{0.13, 240.0, 424.0, 0.0};

  SplitChannel split_channel = SplitChannel::Idler;
  double split_ratio = 0.5;

  double coincidence_window_ns = 30.0;
  double bin_width_ns = 2.0;
  double range_ns = 30.0;

  HomodyneConfig homodyne{2e9, 2.1e8, 320, 64, 270000, 0.13, 0.95,
                          {EnvelopeKind::Decay, 0.0, 7.2}, 0.0};
  std::uint32_t n_reference_traces = 0; // 0 -> same as n_traces
  std::uint32_t variance_rebin = 1;
  double fit_guard_ns = -1.0; // < 0 -> 5 filter time constants
  bool fit_free_baseline = true;
};

RunConfig parse_run_config(std::string_view text);

/// As above, but additionally requires the listed keys to be present.
RunConfig parse_run_config(std::string_view text,
                           std::span<const std::string_view> required_keys);

// ---------------------------------------------------------------------------
// CSV export (deterministic byte-identical output for identical input)
// ---------------------------------------------------------------------------

void export_histogram_csv(const CorrelationHistogram& hist,
                          const std::filesystem::path& path);
void export_g2_csv(const NormalizedG2& g2, const std::filesystem::path& path);
void export_variance_csv(const VarianceEnvelope& env,
                         const std::filesystem::path& path);
void export_fit_csv(const ExpFitResult& fit, ExpModel model,
                    const std::filesystem::path& path);

/// Three-column CSV reader (header line, then x,y,error rows) for refitting
/// exported envelopes.
struct CsvColumns {
  std::vector<double> x, y, error;
};
CsvColumns read_xy_error_csv(const std::filesystem::path& path);

} // namespace cpl
