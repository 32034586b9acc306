#pragma once

namespace thermies {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace thermies
