#pragma once

namespace fraclab {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace fraclab
