#include "cpl/tagio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>

namespace cpl {

namespace {

constexpr std::uint8_t kMaxChannels = 64;
constexpr std::size_t kWriteBuffer = 1 << 20;

void store_u32_le(char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}
void store_u64_le(char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}
std::uint32_t load_u32_le(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}
std::uint64_t load_u64_le(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}
void store_f32_le(char* p, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  store_u32_le(p, bits);
}
float load_f32_le(const char* p) {
  const std::uint32_t bits = load_u32_le(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

[[noreturn]] void fail(TagIoErrc code, const std::string& msg) {
  throw TagIoError(code, std::string(to_string(code)) + ": " + msg);
}

} // namespace

const char* to_string(TagIoErrc code) {
  switch (code) {
    case TagIoErrc::BadMagic: return "bad magic";
    case TagIoErrc::UnsupportedResolution: return "unsupported resolution";
    case TagIoErrc::BadHeader: return "bad header";
    case TagIoErrc::Truncated: return "truncated record";
    case TagIoErrc::BadRecord: return "bad record";
    case TagIoErrc::NonMonotonic: return "non-monotonic ticks";
    case TagIoErrc::SizeMismatch: return "file size mismatch";
    case TagIoErrc::Io: return "io error";
  }
  return "unknown";
}

// --------------------------------------------------------------------------
// Tag files
// --------------------------------------------------------------------------

TagFileWriter::TagFileWriter(const std::filesystem::path& path,
                             std::uint8_t channel_count)
    : path_(path) {
  if (channel_count == 0 || channel_count > kMaxChannels)
    fail(TagIoErrc::BadHeader, "channel count must be in [1,64]");
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) fail(TagIoErrc::Io, "cannot open " + path.string());
  char header[kTagHeaderSize] = {};
  std::memcpy(header, kTagMagic, 8);
  store_u32_le(header + 8, kTickPs);
  header[12] = static_cast<char>(channel_count);
  out_.write(header, sizeof header);
  buffer_.reserve(kWriteBuffer);
  last_tick_.assign(channel_count, 0);
  has_last_.assign(channel_count, false);
}

TagFileWriter::~TagFileWriter() {
  try {
    close();
  } catch (...) {
    // destructor must not throw; close() explicitly to observe errors
  }
}

void TagFileWriter::append(std::uint64_t ticks, std::uint8_t channel) {
  if (channel >= last_tick_.size())
    fail(TagIoErrc::BadRecord, "channel id out of range");
  if (has_last_[channel] && ticks < last_tick_[channel])
    fail(TagIoErrc::NonMonotonic, "ticks decrease within channel");
  last_tick_[channel] = ticks;
  has_last_[channel] = true;
  char record[kTagRecordSize] = {};
  store_u64_le(record, ticks);
  record[8] = static_cast<char>(channel);
  buffer_.insert(buffer_.end(), record, record + sizeof record);
  if (buffer_.size() >= kWriteBuffer) flush_buffer();
}

void TagFileWriter::flush_buffer() {
  if (buffer_.empty()) return;
  out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!out_) fail(TagIoErrc::Io, "write failed: " + path_.string());
  buffer_.clear();
}

void TagFileWriter::close() {
  if (!out_.is_open()) return;
  flush_buffer();
  out_.close();
  if (out_.fail()) fail(TagIoErrc::Io, "close failed: " + path_.string());
}

void write_tags(const std::filesystem::path& path,
                std::span<const TagStream> streams) {
  std::uint8_t channel_count = 0;
  for (const auto& s : streams) {
    if (s.channel >= kMaxChannels)
      fail(TagIoErrc::BadRecord, "channel id out of range");
    channel_count = std::max<std::uint8_t>(channel_count, s.channel + 1);
  }
  if (channel_count == 0) channel_count = 1;

  TagFileWriter writer(path, channel_count);
  // k-way merge by (ticks, channel)
  std::vector<std::size_t> pos(streams.size(), 0);
  for (;;) {
    std::size_t best = streams.size();
    for (std::size_t i = 0; i < streams.size(); ++i) {
      if (pos[i] >= streams[i].ticks.size()) continue;
      if (best == streams.size() ||
          streams[i].ticks[pos[i]] < streams[best].ticks[pos[best]] ||
          (streams[i].ticks[pos[i]] == streams[best].ticks[pos[best]] &&
           streams[i].channel < streams[best].channel))
        best = i;
    }
    if (best == streams.size()) break;
    writer.append(streams[best].ticks[pos[best]], streams[best].channel);
    ++pos[best];
  }
  writer.close();
}

std::vector<TagStream> read_tags(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(TagIoErrc::Io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);

  if (file_size < kTagHeaderSize)
    fail(TagIoErrc::Truncated, "file shorter than header");
  char header[kTagHeaderSize];
  in.read(header, sizeof header);
  if (!in) fail(TagIoErrc::Io, "header read failed");
  if (std::memcmp(header, kTagMagic, 8) != 0)
    fail(TagIoErrc::BadMagic, "not a tag file");
  const std::uint32_t tick_ps = load_u32_le(header + 8);
  if (tick_ps != kTickPs)
    fail(TagIoErrc::UnsupportedResolution,
         "tick_ps " + std::to_string(tick_ps));
  const std::uint8_t channel_count = static_cast<std::uint8_t>(header[12]);
  if (channel_count == 0 || channel_count > kMaxChannels)
    fail(TagIoErrc::BadHeader, "channel count must be in [1,64]");
  if (header[13] != 0 || header[14] != 0 || header[15] != 0)
    fail(TagIoErrc::BadHeader, "reserved bytes must be zero");

  const std::uint64_t payload = file_size - kTagHeaderSize;
  if (payload % kTagRecordSize != 0)
    fail(TagIoErrc::Truncated, "payload is not a whole number of records");

  std::vector<TagStream> streams(channel_count);
  for (std::uint8_t c = 0; c < channel_count; ++c) streams[c].channel = c;
  std::vector<bool> has_last(channel_count, false);
  std::vector<std::uint64_t> last(channel_count, 0);

  std::vector<char> buf(std::min<std::uint64_t>(payload, std::uint64_t{1} << 22));
  std::uint64_t remaining = payload;
  while (remaining > 0) {
    const std::size_t chunk = static_cast<std::size_t>(
        std::min<std::uint64_t>(remaining, buf.size()));
    in.read(buf.data(), static_cast<std::streamsize>(chunk));
    if (!in) fail(TagIoErrc::Io, "record read failed");
    for (std::size_t off = 0; off < chunk; off += kTagRecordSize) {
      const char* rec = buf.data() + off;
      const std::uint64_t ticks = load_u64_le(rec);
      const std::uint8_t channel = static_cast<std::uint8_t>(rec[8]);
      if (channel >= channel_count)
        fail(TagIoErrc::BadRecord, "record channel out of range");
      for (int i = 9; i < 16; ++i)
        if (rec[i] != 0) fail(TagIoErrc::BadRecord, "record padding not zero");
      if (has_last[channel] && ticks < last[channel])
        fail(TagIoErrc::NonMonotonic, "ticks decrease within channel");
      last[channel] = ticks;
      has_last[channel] = true;
      streams[channel].ticks.push_back(ticks);
    }
    remaining -= chunk;
  }
  return streams;
}

// --------------------------------------------------------------------------
// Trace files
// --------------------------------------------------------------------------

void write_traces(const std::filesystem::path& path, const TraceSet& traces) {
  if (traces.trace_length == 0)
    fail(TagIoErrc::BadHeader, "trace_length must be > 0");
  if (traces.trigger_index >= traces.trace_length)
    fail(TagIoErrc::BadHeader, "trigger_index outside trace");
  if (traces.samples.size() % traces.trace_length != 0)
    fail(TagIoErrc::BadHeader, "sample buffer is not a whole number of traces");
  const double rate = std::nearbyint(traces.sample_rate_hz);
  if (!(rate > 0.0) || rate != traces.sample_rate_hz)
    fail(TagIoErrc::BadHeader, "sample rate must be a positive integer in Hz");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(TagIoErrc::Io, "cannot open " + path.string());
  char header[kTraceHeaderSize] = {};
  std::memcpy(header, kTraceMagic, 8);
  store_u64_le(header + 8, static_cast<std::uint64_t>(rate));
  store_u32_le(header + 16, traces.trace_length);
  store_u32_le(header + 20, static_cast<std::uint32_t>(traces.n_traces()));
  store_u32_le(header + 24, traces.trigger_index);
  out.write(header, sizeof header);

  std::vector<char> buf;
  buf.resize(std::min<std::size_t>(traces.samples.size() * 4, kWriteBuffer));
  std::size_t i = 0;
  while (i < traces.samples.size()) {
    std::size_t n = std::min(buf.size() / 4, traces.samples.size() - i);
    for (std::size_t k = 0; k < n; ++k)
      store_f32_le(buf.data() + 4 * k, traces.samples[i + k]);
    out.write(buf.data(), static_cast<std::streamsize>(4 * n));
    i += n;
  }
  out.close();
  if (out.fail()) fail(TagIoErrc::Io, "write failed: " + path.string());
}

TraceSet read_traces(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(TagIoErrc::Io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);

  if (file_size < kTraceHeaderSize)
    fail(TagIoErrc::Truncated, "file shorter than header");
  char header[kTraceHeaderSize];
  in.read(header, sizeof header);
  if (!in) fail(TagIoErrc::Io, "header read failed");
  if (std::memcmp(header, kTraceMagic, 8) != 0)
    fail(TagIoErrc::BadMagic, "not a trace file");
  const std::uint64_t sample_rate = load_u64_le(header + 8);
  const std::uint32_t trace_length = load_u32_le(header + 16);
  const std::uint32_t n_traces = load_u32_le(header + 20);
  const std::uint32_t trigger_index = load_u32_le(header + 24);
  if (sample_rate == 0) fail(TagIoErrc::BadHeader, "sample rate is zero");
  if (trace_length == 0) fail(TagIoErrc::BadHeader, "trace_length is zero");
  if (trigger_index >= trace_length)
    fail(TagIoErrc::BadHeader, "trigger_index outside trace");
  for (int i = 28; i < 32; ++i)
    if (header[i] != 0) fail(TagIoErrc::BadHeader, "reserved bytes must be zero");

  const std::uint64_t n_samples =
      static_cast<std::uint64_t>(trace_length) * n_traces;
  // size is validated before any payload allocation
  if (file_size != kTraceHeaderSize + 4 * n_samples)
    fail(TagIoErrc::SizeMismatch,
         "payload does not match trace_length * n_traces");

  TraceSet traces;
  traces.sample_rate_hz = static_cast<double>(sample_rate);
  traces.trace_length = trace_length;
  traces.trigger_index = trigger_index;
  traces.samples.resize(n_samples);

  std::vector<char> buf(std::min<std::uint64_t>(4 * n_samples,
                                                std::uint64_t{1} << 22));
  std::uint64_t i = 0;
  while (i < n_samples) {
    const std::size_t n = static_cast<std::size_t>(
        std::min<std::uint64_t>(buf.size() / 4, n_samples - i));
    in.read(buf.data(), static_cast<std::streamsize>(4 * n));
    if (!in) fail(TagIoErrc::Io, "sample read failed");
    for (std::size_t k = 0; k < n; ++k)
      traces.samples[i + k] = load_f32_le(buf.data() + 4 * k);
    i += n;
  }
  return traces;
}

// --------------------------------------------------------------------------
// Run configuration
// --------------------------------------------------------------------------

namespace {

struct ConfigEntry {
  std::string value;
  int line;
};

std::map<std::string, ConfigEntry, std::less<>> parse_key_values(
    std::string_view text) {
  std::map<std::string, ConfigEntry, std::less<>> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                      : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const auto trim = [](std::string_view s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(line_no, "expected `key = value`");
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    if (key.empty()) throw ConfigError(line_no, "empty key");
    if (value.empty()) throw ConfigError(line_no, "empty value for key '" + key + "'");
    if (entries.count(key))
      throw ConfigError(line_no, "duplicate key '" + key + "'");
    entries.emplace(key, ConfigEntry{value, line_no});
  }
  return entries;
}

double parse_double(const ConfigEntry& e, const std::string& key) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + e.value.size() || !std::isfinite(v))
    throw ConfigError(e.line, "invalid number for '" + key + "'");
  return v;
}

std::uint32_t parse_u32(const ConfigEntry& e, const std::string& key) {
  const double v = parse_double(e, key);
  if (v < 0.0 || v > 4294967295.0 || v != std::nearbyint(v))
    throw ConfigError(e.line, "'" + key + "' must be a non-negative integer");
  return static_cast<std::uint32_t>(v);
}

} // namespace

RunConfig parse_run_config(std::string_view text,
                           std::span<const std::string_view> required_keys) {
  const auto entries = parse_key_values(text);
  RunConfig cfg;

  using Handler = std::function<void(const ConfigEntry&, const std::string&)>;
  const auto in_range = [](const ConfigEntry& e, const std::string& key,
                           double v, double lo, double hi) {
    if (v < lo || v > hi) {
      char msg[128];
      std::snprintf(msg, sizeof msg, "'%s' must be in [%g, %g]", key.c_str(),
                    lo, hi);
      throw ConfigError(e.line, msg);
    }
  };
  const auto positive = [](const ConfigEntry& e, const std::string& key,
                           double v) {
    if (!(v > 0.0)) throw ConfigError(e.line, "'" + key + "' must be > 0");
  };
  const auto non_negative = [](const ConfigEntry& e, const std::string& key,
                               double v) {
    if (!(v >= 0.0)) throw ConfigError(e.line, "'" + key + "' must be >= 0");
  };

  std::map<std::string, Handler, std::less<>> schema;
  schema["pair_rate"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.source.pair_rate_hz = parse_double(e, k);
    non_negative(e, k, cfg.source.pair_rate_hz);
  };
  schema["tau_ns"] = [&](const ConfigEntry& e, const std::string& k) {
    const double v = parse_double(e, k);
    positive(e, k, v);
    cfg.source.tau_ns = v;
    cfg.homodyne.envelope.tau_ns = v;
  };
  schema["duration_s"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.source.duration_s = parse_double(e, k);
    positive(e, k, cfg.source.duration_s);
    cfg.has_duration = true;
  };
  schema["background_rate_signal"] = [&](const ConfigEntry& e,
                                         const std::string& k) {
    cfg.source.background_rate_signal_hz = parse_double(e, k);
    non_negative(e, k, cfg.source.background_rate_signal_hz);
  };
  schema["background_rate_idler"] = [&](const ConfigEntry& e,
                                        const std::string& k) {
    cfg.source.background_rate_idler_hz = parse_double(e, k);
    non_negative(e, k, cfg.source.background_rate_idler_hz);
  };
  schema["signal_efficiency"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.detector_signal.efficiency = parse_double(e, k);
    in_range(e, k, cfg.detector_signal.efficiency, 0.0, 1.0);
  };
  schema["idler_efficiency"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.detector_idler.efficiency = parse_double(e, k);
    in_range(e, k, cfg.detector_idler.efficiency, 0.0, 1.0);
  };
  schema["dark_rate_signal"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.detector_signal.dark_rate_hz = parse_double(e, k);
    non_negative(e, k, cfg.detector_signal.dark_rate_hz);
  };
  schema["dark_rate_idler"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.detector_idler.dark_rate_hz = parse_double(e, k);
    non_negative(e, k, cfg.detector_idler.dark_rate_hz);
  };
  schema["jitter_sigma_ps"] = [&](const ConfigEntry& e, const std::string& k) {
    const double v = parse_double(e, k);
    non_negative(e, k, v);
    cfg.detector_signal.jitter_sigma_ps = v;
    cfg.detector_idler.jitter_sigma_ps = v;
  };
  schema["dead_time_ns"] = [&](const ConfigEntry& e, const std::string& k) {
    const double v = parse_double(e, k);
    non_negative(e, k, v);
    cfg.detector_signal.dead_time_ns = v;
    cfg.detector_idler.dead_time_ns = v;
  };
  schema["split_channel"] = [&](const ConfigEntry& e, const std::string& k) {
    if (e.value == "idler")
      cfg.split_channel = SplitChannel::Idler;
    else if (e.value == "signal")
      cfg.split_channel = SplitChannel::Signal;
    else
      throw ConfigError(e.line, "'" + k + "' must be 'idler' or 'signal'");
  };
  schema["split_ratio"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.split_ratio = parse_double(e, k);
    in_range(e, k, cfg.split_ratio, 0.0, 1.0);
  };
  schema["coincidence_window_ns"] = [&](const ConfigEntry& e,
                                        const std::string& k) {
    cfg.coincidence_window_ns = parse_double(e, k);
    positive(e, k, cfg.coincidence_window_ns);
  };
  schema["bin_width_ns"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.bin_width_ns = parse_double(e, k);
    positive(e, k, cfg.bin_width_ns);
  };
  schema["range_ns"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.range_ns = parse_double(e, k);
    positive(e, k, cfg.range_ns);
  };
  schema["sample_rate_hz"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.homodyne.sample_rate_hz = parse_double(e, k);
    positive(e, k, cfg.homodyne.sample_rate_hz);
  };
  schema["bandwidth_hz"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.homodyne.bandwidth_hz = parse_double(e, k);
    positive(e, k, cfg.homodyne.bandwidth_hz);
  };
  schema["trace_length"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.homodyne.trace_length = parse_u32(e, k);
    if (cfg.homodyne.trace_length == 0)
      throw ConfigError(e.line, "'" + k + "' must be > 0");
  };
  schema["trigger_index"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.homodyne.trigger_index = parse_u32(e, k);
  };
  schema["n_traces"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.homodyne.n_traces = parse_u32(e, k);
    if (cfg.homodyne.n_traces == 0)
      throw ConfigError(e.line, "'" + k + "' must be > 0");
  };
  schema["n_reference_traces"] = [&](const ConfigEntry& e,
                                     const std::string& k) {
    cfg.n_reference_traces = parse_u32(e, k);
  };
  schema["eta"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.homodyne.eta = parse_double(e, k);
    in_range(e, k, cfg.homodyne.eta, 0.0, 1.0);
  };
  schema["mode_match"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.homodyne.mode_match = parse_double(e, k);
    in_range(e, k, cfg.homodyne.mode_match, 0.0, 1.0);
  };
  schema["envelope"] = [&](const ConfigEntry& e, const std::string& k) {
    if (e.value == "decay")
      cfg.homodyne.envelope.kind = EnvelopeKind::Decay;
    else if (e.value == "rise")
      cfg.homodyne.envelope.kind = EnvelopeKind::Rise;
    else
      throw ConfigError(e.line, "'" + k + "' must be 'decay' or 'rise'");
  };
  schema["electronic_noise"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.homodyne.electronic_noise = parse_double(e, k);
    non_negative(e, k, cfg.homodyne.electronic_noise);
  };
  schema["variance_rebin"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.variance_rebin = parse_u32(e, k);
    if (cfg.variance_rebin == 0)
      throw ConfigError(e.line, "'" + k + "' must be > 0");
  };
  schema["fit_guard_ns"] = [&](const ConfigEntry& e, const std::string& k) {
    cfg.fit_guard_ns = parse_double(e, k);
    non_negative(e, k, cfg.fit_guard_ns);
  };
  schema["fit_baseline"] = [&](const ConfigEntry& e, const std::string& k) {
    if (e.value == "free")
      cfg.fit_free_baseline = true;
    else if (e.value == "pinned")
      cfg.fit_free_baseline = false;
    else
      throw ConfigError(e.line, "'" + k + "' must be 'free' or 'pinned'");
  };

  for (const auto& [key, entry] : entries) {
    const auto it = schema.find(key);
    if (it == schema.end())
      throw ConfigError(entry.line, "unknown key '" + key + "'");
    it->second(entry, key);
  }

  for (const std::string_view required : required_keys) {
    if (!entries.count(std::string(required)))
      throw ConfigError(0, "missing required key '" + std::string(required) + "'");
  }

  // cross-field constraints
  if (!(cfg.homodyne.sample_rate_hz > 2.0 * cfg.homodyne.bandwidth_hz)) {
    const auto it = entries.find("bandwidth_hz");
    throw ConfigError(it != entries.end() ? it->second.line : 0,
                      "sample_rate_hz must exceed twice bandwidth_hz");
  }
  if (cfg.homodyne.trigger_index >= cfg.homodyne.trace_length) {
    const auto it = entries.find("trigger_index");
    throw ConfigError(it != entries.end() ? it->second.line : 0,
                      "trigger_index must be inside the trace");
  }
  return cfg;
}

RunConfig parse_run_config(std::string_view text) {
  return parse_run_config(text, {});
}

// --------------------------------------------------------------------------
// CSV
// --------------------------------------------------------------------------

namespace {

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) fail(TagIoErrc::Io, "cannot open " + path.string());
  }
  void header(const char* text) { out_ << text << '\n'; }
  void row(double a, double b, double c) {
    check(a); check(b); check(c);
    char line[96];
    std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g\n", a, b, c);
    out_ << line;
  }
  void row(const char* name, double b, double c) {
    check(b); check(c);
    char line[128];
    std::snprintf(line, sizeof line, "%s,%.10g,%.10g\n", name, b, c);
    out_ << line;
  }
  void close() {
    out_.close();
    if (out_.fail()) fail(TagIoErrc::Io, "write failed: " + path_.string());
  }

 private:
  static void check(double v) {
    if (!std::isfinite(v))
      throw std::invalid_argument("export_csv: non-finite value");
  }
  std::ofstream out_;
  std::filesystem::path path_;
};

} // namespace

void export_histogram_csv(const CorrelationHistogram& hist,
                          const std::filesystem::path& path) {
  // errors must be validated before the file is touched
  CsvWriter csv(path);
  csv.header("bin_center_ns,value,error");
  for (std::size_t k = 0; k < hist.bins(); ++k) {
    const double c = static_cast<double>(hist.counts[k]);
    csv.row(hist.bin_center_ns(k), c, std::sqrt(c));
  }
  csv.close();
}

void export_g2_csv(const NormalizedG2& g2, const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("bin_center_ns,value,error");
  for (std::size_t k = 0; k < g2.values.size(); ++k)
    csv.row(g2.centers_ns[k], g2.values[k], g2.errors[k]);
  csv.close();
}

void export_variance_csv(const VarianceEnvelope& env,
                         const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("time_ns,variance,error");
  for (std::size_t k = 0; k < env.values.size(); ++k)
    csv.row(env.time_ns(k), env.values[k], env.errors[k]);
  csv.close();
}

void export_fit_csv(const ExpFitResult& fit, ExpModel model,
                    const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("parameter,value,error");
  csv.row(model == ExpModel::Decay ? "model_decay" : "model_rise", 0.0, 0.0);
  csv.row("amplitude", fit.amplitude, fit.amplitude_err);
  csv.row("tau_ns", fit.tau, fit.tau_err);
  csv.row("baseline", fit.baseline, fit.baseline_err);
  csv.row("t0_ns", fit.t0, fit.t0_err);
  csv.row("chi2_reduced", fit.chi2_reduced, 0.0);
  csv.row("converged", fit.converged ? 1.0 : 0.0, 0.0);
  csv.close();
}

CsvColumns read_xy_error_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(TagIoErrc::Io, "cannot open " + path.string());
  CsvColumns cols;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (std::count(line.begin(), line.end(), ',') != 2)
        throw ConfigError(line_no, "expected a 3-column CSV header");
      continue;
    }
    double a, b, c;
    char tail;
    const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &a, &b, &c, &tail);
    if (got != 3)
      throw ConfigError(line_no, "expected `x,y,error` row");
    cols.x.push_back(a);
    cols.y.push_back(b);
    cols.error.push_back(c);
  }
  return cols;
}

} // namespace cpl
