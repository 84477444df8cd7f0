#pragma once

namespace orbitherm {
inline constexpr const char* kToolName = "orbitherm";
inline constexpr const char* kToolVersion = "0.1.0";
}  // namespace orbitherm
