#pragma once

namespace reefmap {

inline constexpr const char* kVersion = "0.1.0";

} // namespace reefmap
