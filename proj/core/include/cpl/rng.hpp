#pragma once

#include <cmath>
#include <cstdint>

namespace cpl {

/// SplitMix64 finalizer; decorrelates nearby integers into well-mixed seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Derives an independent substream seed from (seed, stream id, index).
/// Identical inputs give identical substreams on every platform, which is
/// what makes partitioned generation reproducible across thread counts.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index) {
  return mix64(mix64(mix64(seed) ^ stream) ^ index);
}

// Stream ids used by the simulation modules.
namespace stream_id {
inline constexpr std::uint64_t pairs = 0x70616972;
inline constexpr std::uint64_t background_signal = 0x62677369;
inline constexpr std::uint64_t background_idler = 0x62676964;
inline constexpr std::uint64_t detect_thin = 0x64657468;
inline constexpr std::uint64_t detect_dark = 0x64656461;
inline constexpr std::uint64_t beamsplit = 0x73706c74;
inline constexpr std::uint64_t trace = 0x74726163;
} // namespace stream_id

/// xoshiro256++ generator. Small state, cheap construction from a single
/// 64-bit seed; the per-event and per-trace substream pattern constructs
/// millions of these.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // Expand the seed through SplitMix64 as recommended by the xoshiro
    // authors; avoids the all-zero state.
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Bernoulli trial with probability p.
  bool bernoulli(double p) { return uniform() < p; }

  /// Exponential variate with the given mean. Uses log(1-u) so the argument
  /// never hits zero.
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  /// Standard normal via the Marsaglia polar method (no trig calls).
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace cpl
