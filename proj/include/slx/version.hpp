#pragma once

namespace slx {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kGeneratedBy = "slx 0.1.0";

}  // namespace slx
