#pragma once

#include <cstdint>
#include <vector>

namespace cpl {

/// Timestamp resolution of the time-tagging hardware model: 125 ps.
inline constexpr std::uint32_t kTickPs = 125;
inline constexpr double kTickNs = 0.125;

inline std::uint64_t ns_to_ticks(double t_ns) {
  return static_cast<std::uint64_t>(t_ns / kTickNs + 0.5);
}

inline double ticks_to_ns(std::uint64_t ticks) {
  return static_cast<double>(ticks) * kTickNs;
}

/// One detector channel's detection record: sorted timestamps in 125 ps
/// ticks. The universal currency of the correlation pipeline.
struct TagStream {
  std::uint8_t channel = 0;
  std::vector<std::uint64_t> ticks;

  std::size_t size() const { return ticks.size(); }
  bool empty() const { return ticks.empty(); }
};

} // namespace cpl
