#pragma once

namespace jpa {

inline constexpr const char* kToolName = "jpasim";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace jpa
