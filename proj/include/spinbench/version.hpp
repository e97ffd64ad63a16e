#pragma once

namespace spinbench {

inline constexpr const char* version = "0.1.0";
inline constexpr const char* format_version = "spinbench v1";

} // namespace spinbench
