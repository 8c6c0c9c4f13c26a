#include "cpl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

#include "cpl/pair_source.hpp"
#include "cpl/parallel.hpp"
#include "cpl/rng.hpp"
#include "cpl/version.hpp"

namespace cpl {

namespace {

constexpr double kNsPerS = 1e9;
constexpr double kMaxPipelineEvents = 4e9;
constexpr std::uint32_t kTraceBlock = 1 << 16;
constexpr std::size_t kWindowBatch = 16;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw TagIoError(TagIoErrc::Io,
                     "cannot create output directory " + dir.string());
}

// --------------------------------------------------------------------------
// simulate
// --------------------------------------------------------------------------

// Detected (post-thinning, post-jitter) photon arrivals of one generation
// window, one vector per pipeline channel.
struct WindowDetected {
  std::vector<double> herald;
  std::vector<double> split;
};

void thin_and_jitter(Rng& rng, const DetectorConfig& det, double duration_ns,
                     const std::vector<double>& times,
                     std::vector<double>& out) {
  const double jitter_ns = det.jitter_sigma_ps * 1e-3;
  for (const double t : times) {
    if (!rng.bernoulli(det.efficiency)) continue;
    const double tj = jitter_ns > 0.0 ? t + jitter_ns * rng.gauss() : t;
    if (tj >= 0.0 && tj < duration_ns) out.push_back(tj);
  }
}

void dark_counts(Rng& rng, double rate_hz, double begin_ns, double end_ns,
                 std::vector<double>& out) {
  if (rate_hz <= 0.0) return;
  const double mean_gap_ns = kNsPerS / rate_hz;
  double t = begin_ns;
  for (;;) {
    t += rng.exponential(mean_gap_ns);
    if (t >= end_ns) return;
    out.push_back(t);
  }
}

WindowDetected detect_window(const RunConfig& cfg, std::uint64_t seed,
                             std::uint64_t w) {
  const TruthEvents ev = generate_window(cfg.source, seed, w);
  const double duration_ns = cfg.source.duration_s * kNsPerS;
  const double w_begin = static_cast<double>(w) * kGenerationWindowS * kNsPerS;
  const double w_end = std::min(duration_ns, w_begin + kGenerationWindowS * kNsPerS);

  const bool split_idler = cfg.split_channel == SplitChannel::Idler;
  const DetectorConfig& herald_det =
      split_idler ? cfg.detector_signal : cfg.detector_idler;
  const DetectorConfig& split_det =
      split_idler ? cfg.detector_idler : cfg.detector_signal;

  std::vector<double> herald_photons, split_photons;
  herald_photons.reserve(ev.pairs.size());
  split_photons.reserve(ev.pairs.size());
  for (const PairEvent& pair : ev.pairs) {
    herald_photons.push_back(split_idler ? pair.t_signal_ns : pair.t_idler_ns);
    split_photons.push_back(split_idler ? pair.t_idler_ns : pair.t_signal_ns);
  }
  const std::vector<double>& herald_bg =
      split_idler ? ev.background_signal_ns : ev.background_idler_ns;
  const std::vector<double>& split_bg =
      split_idler ? ev.background_idler_ns : ev.background_signal_ns;

  WindowDetected out;
  {
    Rng rng(derive_seed(seed, stream_id::detect_thin, 2 * w));
    thin_and_jitter(rng, herald_det, duration_ns, herald_photons, out.herald);
    thin_and_jitter(rng, herald_det, duration_ns, herald_bg, out.herald);
  }
  {
    Rng rng(derive_seed(seed, stream_id::detect_thin, 2 * w + 1));
    thin_and_jitter(rng, split_det, duration_ns, split_photons, out.split);
    thin_and_jitter(rng, split_det, duration_ns, split_bg, out.split);
  }
  {
    Rng rng(derive_seed(seed, stream_id::detect_dark, 2 * w));
    dark_counts(rng, herald_det.dark_rate_hz, w_begin, w_end, out.herald);
  }
  {
    Rng rng(derive_seed(seed, stream_id::detect_dark, 2 * w + 1));
    dark_counts(rng, split_det.dark_rate_hz, w_begin, w_end, out.split);
  }
  return out;
}

/// Orders loosely-sorted pushes, quantizes to ticks, and applies the
/// detector dead time. Events may be pushed out of order by a bounded
/// amount (jitter, cascade delay); anything still out of order at emission
/// is clamped to the last emitted tick to keep the channel monotonic.
class ChannelEmitter {
 public:
  explicit ChannelEmitter(double dead_time_ns) : dead_time_ns_(dead_time_ns) {}

  void push(double t_ns) { pending_.push(t_ns); }

  void drain(double horizon_ns, std::vector<std::uint64_t>& out) {
    while (!pending_.empty() && pending_.top() < horizon_ns) {
      std::uint64_t tick = ns_to_ticks(pending_.top());
      pending_.pop();
      if (has_last_ && tick < last_tick_) tick = last_tick_;
      if (has_last_ && dead_time_ns_ > 0.0 &&
          ticks_to_ns(tick - last_tick_) < dead_time_ns_)
        continue;
      out.push_back(tick);
      last_tick_ = tick;
      has_last_ = true;
    }
  }

 private:
  std::priority_queue<double, std::vector<double>, std::greater<>> pending_;
  double dead_time_ns_;
  std::uint64_t last_tick_ = 0;
  bool has_last_ = false;
};

} // namespace

std::string content_hash(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunManifest::write(const std::filesystem::path& out_dir) const {
  ensure_dir(out_dir);
  std::ofstream out(out_dir / "manifest.txt", std::ios::binary | std::ios::trunc);
  if (!out)
    throw TagIoError(TagIoErrc::Io, "cannot write manifest in " + out_dir.string());
  out << "tool_version = " << kVersion << '\n';
  out << "subcommand = " << subcommand << '\n';
  out << "config_path = " << (config_path.empty() ? "-" : config_path) << '\n';
  out << "config_hash = " << (config_hash.empty() ? "-" : config_hash) << '\n';
  out << "seed = " << seed << '\n';
  out << "threads = " << threads << '\n';
  out << "out = " << out_dir.string() << '\n';
  for (const auto& [k, v] : extra) out << k << " = " << v << '\n';
  out.close();
  if (out.fail())
    throw TagIoError(TagIoErrc::Io, "manifest write failed in " + out_dir.string());
}

SimulateResult run_simulate(const SimulateOptions& opts) {
  static constexpr std::string_view required[] = {"duration_s"};
  const RunConfig cfg = parse_run_config(opts.config_text, required);
  validate(cfg.source);
  validate(cfg.detector_signal);
  validate(cfg.detector_idler);

  const double expected_events =
      cfg.source.duration_s *
      (2.0 * cfg.source.pair_rate_hz + cfg.source.background_rate_signal_hz +
       cfg.source.background_rate_idler_hz +
       cfg.detector_signal.dark_rate_hz + cfg.detector_idler.dark_rate_hz);
  if (expected_events > kMaxPipelineEvents)
    throw ConfigError(0, "duration * rates exceeds event-count capacity");

  ensure_dir(opts.out_dir);
  SimulateResult result;
  result.tags_path = opts.out_dir / "tags.cptag";
  result.duration_s = cfg.source.duration_s;

  const std::uint64_t n_windows = generation_window_count(cfg.source);
  TagFileWriter writer(result.tags_path, 3);
  const bool split_idler = cfg.split_channel == SplitChannel::Idler;
  ChannelEmitter herald_emitter(split_idler ? cfg.detector_signal.dead_time_ns
                                            : cfg.detector_idler.dead_time_ns);
  ChannelEmitter split_emitter(split_idler ? cfg.detector_idler.dead_time_ns
                                           : cfg.detector_signal.dead_time_ns);
  Rng split_rng(derive_seed(opts.seed, stream_id::beamsplit, 0));

  std::vector<std::uint64_t> herald_out, split_out;
  auto write_round = [&] {
    // merge the two sorted emission lists by (tick, channel); arm routing
    // consumes the splitter stream in split-tag order
    std::size_t i = 0, j = 0;
    while (i < herald_out.size() || j < split_out.size()) {
      const bool take_herald =
          i < herald_out.size() &&
          (j >= split_out.size() || herald_out[i] <= split_out[j]);
      if (take_herald) {
        writer.append(herald_out[i], 0);
        ++result.n_herald_tags;
        ++i;
      } else {
        const std::uint8_t arm = split_rng.bernoulli(cfg.split_ratio) ? 1 : 2;
        writer.append(split_out[j], arm);
        if (arm == 1)
          ++result.n_arm1_tags;
        else
          ++result.n_arm2_tags;
        ++j;
      }
    }
    herald_out.clear();
    split_out.clear();
  };

  std::vector<WindowDetected> batch(std::min<std::size_t>(kWindowBatch, n_windows));
  for (std::uint64_t base = 0; base < n_windows; base += batch.size()) {
    const std::size_t count =
        static_cast<std::size_t>(std::min<std::uint64_t>(batch.size(),
                                                         n_windows - base));
    parallel_for(count, opts.threads, [&](std::size_t k) {
      batch[k] = detect_window(cfg, opts.seed, base + k);
    });
    for (std::size_t k = 0; k < count; ++k) {
      for (const double t : batch[k].herald) herald_emitter.push(t);
      for (const double t : batch[k].split) split_emitter.push(t);
      const double horizon =
          static_cast<double>(base + k) * kGenerationWindowS * kNsPerS;
      herald_emitter.drain(horizon, herald_out);
      split_emitter.drain(horizon, split_out);
      write_round();
      batch[k] = WindowDetected{};
    }
  }
  const double infinity = std::numeric_limits<double>::infinity();
  herald_emitter.drain(infinity, herald_out);
  split_emitter.drain(infinity, split_out);
  write_round();
  writer.close();

  RunManifest manifest;
  manifest.subcommand = "simulate";
  manifest.config_path = opts.config_path;
  manifest.config_hash = content_hash(opts.config_text);
  manifest.seed = opts.seed;
  manifest.threads = opts.threads;
  manifest.extra = {
      {"tags_file", result.tags_path.filename().string()},
      {"split_channel", split_idler ? "idler" : "signal"},
      {"n_herald_tags", std::to_string(result.n_herald_tags)},
      {"n_arm1_tags", std::to_string(result.n_arm1_tags)},
      {"n_arm2_tags", std::to_string(result.n_arm2_tags)},
  };
  manifest.write(opts.out_dir);
  return result;
}

// --------------------------------------------------------------------------
// hbt
// --------------------------------------------------------------------------

HbtResult run_hbt(const HbtOptions& opts) {
  if (!(opts.window_ns > 0.0))
    throw ConfigError(0, "window must be > 0");
  if (!(opts.bin_width_ns > 0.0))
    throw ConfigError(0, "bin width must be > 0");
  if (!(opts.range_ns >= opts.bin_width_ns))
    throw ConfigError(0, "range must be at least one bin wide");

  const std::vector<TagStream> streams = read_tags(opts.tags_path);
  const auto channel = [&](std::uint8_t c) -> const TagStream& {
    if (c >= streams.size())
      throw ConfigError(0, "tag file has no channel " + std::to_string(c));
    return streams[c];
  };
  const TagStream& heralds = channel(opts.herald_channel);
  const TagStream& arm1 = channel(opts.arm1_channel);
  const TagStream& arm2 = channel(opts.arm2_channel);
  if (heralds.empty()) throw ConfigError(0, "herald channel is empty");

  // herald-arm histograms cover [0, window + range) so every shifted
  // accidental sum is defined; the g2 grid is centered so bin centers land
  // on multiples of the bin width (a center at exactly 0)
  const double support_ns = opts.window_ns + opts.range_ns;
  const double half_bin = 0.5 * opts.bin_width_ns;
  const CorrelationHistogram g_si1 = cross_histogram(
      heralds, arm1, 0.0, support_ns, opts.bin_width_ns, opts.threads);
  const CorrelationHistogram g_si2 = cross_histogram(
      heralds, arm2, 0.0, support_ns, opts.bin_width_ns, opts.threads);
  const CorrelationHistogram raw = conditional_histogram(
      heralds, arm1, arm2, opts.window_ns, -(opts.range_ns + half_bin),
      opts.range_ns + half_bin, opts.bin_width_ns, opts.threads);
  const AccidentalEstimate acc =
      accidental_estimate(g_si1, g_si2, opts.window_ns,
                          -(opts.range_ns + half_bin), opts.range_ns + half_bin);

  HbtResult result;
  result.g2 = normalize_g2(raw, acc);
  result.n_heralds = heralds.size();

  // merged idler stream for the heralding efficiency estimate
  TagStream merged;
  merged.channel = opts.arm1_channel;
  merged.ticks.resize(arm1.size() + arm2.size());
  std::merge(arm1.ticks.begin(), arm1.ticks.end(), arm2.ticks.begin(),
             arm2.ticks.end(), merged.ticks.begin());
  result.heralding_efficiency =
      heralding_efficiency(heralds, merged, opts.window_ns);

  std::size_t zero_bin = 0, min_bin = 0;
  bool have_min = false;
  for (std::size_t k = 0; k < result.g2.values.size(); ++k) {
    if (std::fabs(result.g2.centers_ns[k]) <
        std::fabs(result.g2.centers_ns[zero_bin]))
      zero_bin = k;
    if (result.g2.undefined[k]) continue;
    if (!have_min || result.g2.values[k] < result.g2.values[min_bin]) {
      min_bin = k;
      have_min = true;
    }
  }
  result.g2_zero = result.g2.values[zero_bin];
  result.g2_zero_error = result.g2.errors[zero_bin];
  result.g2_min = have_min ? result.g2.values[min_bin] : 0.0;
  result.g2_min_center_ns = result.g2.centers_ns[min_bin];

  ensure_dir(opts.out_dir);
  result.g2_csv = opts.out_dir / "g2.csv";
  result.raw_csv = opts.out_dir / "conditional_histogram.csv";
  result.summary_path = opts.out_dir / "summary.txt";
  export_g2_csv(result.g2, result.g2_csv);
  export_histogram_csv(raw, result.raw_csv);

  {
    std::ofstream out(result.summary_path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw TagIoError(TagIoErrc::Io, "cannot write " + result.summary_path.string());
    out << "n_heralds = " << result.n_heralds << '\n';
    out << "n_arm1 = " << arm1.size() << '\n';
    out << "n_arm2 = " << arm2.size() << '\n';
    out << "heralding_efficiency = " << format_double(result.heralding_efficiency)
        << '\n';
    out << "g2_zero = " << format_double(result.g2_zero) << '\n';
    out << "g2_zero_error = " << format_double(result.g2_zero_error) << '\n';
    out << "g2_min = " << format_double(result.g2_min) << '\n';
    out << "g2_min_center_ns = " << format_double(result.g2_min_center_ns)
        << '\n';
    out.close();
    if (out.fail())
      throw TagIoError(TagIoErrc::Io, "write failed: " + result.summary_path.string());
  }

  RunManifest manifest;
  manifest.subcommand = "hbt";
  manifest.config_path = opts.tags_path.string();
  manifest.config_hash = "-";
  manifest.threads = opts.threads;
  manifest.extra = {
      {"window_ns", format_double(opts.window_ns)},
      {"bin_width_ns", format_double(opts.bin_width_ns)},
      {"range_ns", format_double(opts.range_ns)},
      {"herald_channel", std::to_string(opts.herald_channel)},
      {"arm1_channel", std::to_string(opts.arm1_channel)},
      {"arm2_channel", std::to_string(opts.arm2_channel)},
  };
  manifest.write(opts.out_dir);
  return result;
}

// --------------------------------------------------------------------------
// homodyne
// --------------------------------------------------------------------------

HomodyneResult run_homodyne(const HomodyneOptions& opts) {
  const RunConfig cfg = parse_run_config(opts.config_text);
  validate(cfg.homodyne);

  const std::uint64_t data_seed = derive_seed(opts.seed, 0x686f6d64, 0);
  const std::uint64_t ref_seed = derive_seed(opts.seed, 0x686f6d64, 1);

  HomodyneConfig ref_cfg = cfg.homodyne;
  ref_cfg.eta = 0.0;
  if (cfg.n_reference_traces > 0) ref_cfg.n_traces = cfg.n_reference_traces;

  const auto accumulate = [&](const HomodyneConfig& hcfg, std::uint64_t seed) {
    MomentAccumulator acc;
    for (std::uint64_t first = 0; first < hcfg.n_traces; first += kTraceBlock) {
      const std::uint32_t count = static_cast<std::uint32_t>(
          std::min<std::uint64_t>(kTraceBlock, hcfg.n_traces - first));
      acc.add(synth_trace_block(hcfg, seed, first, count, opts.threads));
    }
    return acc;
  };
  const MomentAccumulator acc_data = accumulate(cfg.homodyne, data_seed);
  const MomentAccumulator acc_ref = accumulate(ref_cfg, ref_seed);

  HomodyneResult result;
  result.variance = variance_ratio(acc_data, acc_ref);
  result.model = cfg.homodyne.envelope.kind == EnvelopeKind::Decay
                     ? ExpModel::Decay
                     : ExpModel::Rise;

  // analysis axis, optionally rebinned
  const std::uint32_t rebin = std::max<std::uint32_t>(1, cfg.variance_rebin);
  std::vector<double> t, y, err;
  for (std::size_t k = 0; k + rebin <= result.variance.values.size();
       k += rebin) {
    double st = 0, sy = 0, se2 = 0;
    for (std::uint32_t j = 0; j < rebin; ++j) {
      st += result.variance.time_ns(k + j);
      sy += result.variance.values[k + j];
      se2 += result.variance.errors[k + j] * result.variance.errors[k + j];
    }
    t.push_back(st / rebin);
    y.push_back(sy / rebin);
    err.push_back(std::sqrt(se2) / rebin);
  }

  result.fit_guard_ns =
      cfg.fit_guard_ns >= 0.0
          ? cfg.fit_guard_ns
          : 5.0 * kNsPerS / (2.0 * M_PI * cfg.homodyne.bandwidth_hz);

  std::vector<double> fx, fy, fe;
  const double t0 = cfg.homodyne.envelope.t0_ns;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (std::fabs(t[k] - t0) < result.fit_guard_ns) continue;
    fx.push_back(t[k]);
    fy.push_back(y[k]);
    fe.push_back(err[k]);
  }

  ExpFitOptions fit_opts;
  fit_opts.model = result.model;
  fit_opts.fix_t0 = true;
  fit_opts.t0 = t0;
  fit_opts.fix_baseline = !cfg.fit_free_baseline;
  fit_opts.baseline = 1.0;
  result.fit = fit_exp(fx, fy, fe, fit_opts);

  std::size_t peak = 0;
  for (std::size_t k = 1; k < result.variance.values.size(); ++k)
    if (result.variance.values[k] > result.variance.values[peak]) peak = k;
  result.peak_index = peak;
  result.peak_offset_samples = static_cast<std::int64_t>(peak) -
                               static_cast<std::int64_t>(result.variance.trigger_index);

  ensure_dir(opts.out_dir);
  result.variance_csv = opts.out_dir / "variance.csv";
  result.fit_csv = opts.out_dir / "fit.csv";
  result.report_path = opts.out_dir / "fit.txt";
  if (rebin == 1) {
    export_variance_csv(result.variance, result.variance_csv);
  } else {
    // same schema as the per-sample export, on the rebinned axis
    std::ofstream out(result.variance_csv, std::ios::binary | std::ios::trunc);
    if (!out)
      throw TagIoError(TagIoErrc::Io, "cannot open " + result.variance_csv.string());
    out << "time_ns,variance,error\n";
    char line[96];
    for (std::size_t k = 0; k < t.size(); ++k) {
      std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g\n", t[k], y[k], err[k]);
      out << line;
    }
    out.close();
    if (out.fail())
      throw TagIoError(TagIoErrc::Io, "write failed: " + result.variance_csv.string());
  }
  export_fit_csv(result.fit, result.model, result.fit_csv);
  {
    std::ofstream out(result.report_path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw TagIoError(TagIoErrc::Io, "cannot open " + result.report_path.string());
    out << format_fit_report(result.fit, result.model);
    out << "fit_guard_ns = " << format_double(result.fit_guard_ns) << '\n';
    out << "peak_offset_samples = " << result.peak_offset_samples << '\n';
    out.close();
    if (out.fail())
      throw TagIoError(TagIoErrc::Io, "write failed: " + result.report_path.string());
  }

  RunManifest manifest;
  manifest.subcommand = "homodyne";
  manifest.config_path = opts.config_path;
  manifest.config_hash = content_hash(opts.config_text);
  manifest.seed = opts.seed;
  manifest.threads = opts.threads;
  manifest.extra = {
      {"envelope", result.model == ExpModel::Decay ? "decay" : "rise"},
      {"n_traces", std::to_string(cfg.homodyne.n_traces)},
      {"n_reference_traces", std::to_string(ref_cfg.n_traces)},
      {"fit_guard_ns", format_double(result.fit_guard_ns)},
      {"variance_rebin", std::to_string(rebin)},
  };
  manifest.write(opts.out_dir);
  return result;
}

// --------------------------------------------------------------------------
// fit
// --------------------------------------------------------------------------

FitResult run_fit(const FitOptions& opts) {
  const CsvColumns cols = read_xy_error_csv(opts.csv_path);
  std::vector<double> fx, fy, fe;
  for (std::size_t k = 0; k < cols.x.size(); ++k) {
    if (opts.guard_ns > 0.0 && std::fabs(cols.x[k] - opts.t0_ns) < opts.guard_ns)
      continue;
    fx.push_back(cols.x[k]);
    fy.push_back(cols.y[k]);
    fe.push_back(cols.error[k]);
  }

  ExpFitOptions fit_opts;
  fit_opts.model = opts.model;
  fit_opts.fix_t0 = opts.fix_t0;
  fit_opts.t0 = opts.t0_ns;
  fit_opts.fix_baseline = opts.fix_baseline;
  fit_opts.baseline = opts.baseline;

  FitResult result;
  try {
    result.fit = fit_exp(fx, fy, fe, fit_opts);
  } catch (const std::invalid_argument& e) {
    // malformed/insufficient input data is a config-class failure
    throw ConfigError(0, e.what());
  }

  ensure_dir(opts.out_dir);
  result.fit_csv = opts.out_dir / "fit.csv";
  result.report_path = opts.out_dir / "fit.txt";
  export_fit_csv(result.fit, opts.model, result.fit_csv);
  {
    std::ofstream out(result.report_path, std::ios::binary | std::ios::trunc);
    if (!out)
      throw TagIoError(TagIoErrc::Io, "cannot open " + result.report_path.string());
    out << format_fit_report(result.fit, opts.model);
    out.close();
    if (out.fail())
      throw TagIoError(TagIoErrc::Io, "write failed: " + result.report_path.string());
  }

  RunManifest manifest;
  manifest.subcommand = "fit";
  manifest.config_path = opts.csv_path.string();
  manifest.config_hash = "-";
  manifest.extra = {
      {"model", opts.model == ExpModel::Decay ? "decay" : "rise"},
      {"t0_ns", format_double(opts.t0_ns)},
      {"guard_ns", format_double(opts.guard_ns)},
      {"baseline", opts.fix_baseline ? format_double(opts.baseline) : "free"},
  };
  manifest.write(opts.out_dir);
  return result;
}

int run_with_exit_code(const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const TagIoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
}

} // namespace cpl
