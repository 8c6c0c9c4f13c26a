#pragma once

namespace cpl {

inline constexpr const char* kVersion = "0.1.0";

} // namespace cpl
