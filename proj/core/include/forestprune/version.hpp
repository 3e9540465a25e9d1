#pragma once

namespace forestprune {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace forestprune
