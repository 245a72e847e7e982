#pragma once

#define BOHRGAP_VERSION "0.1.0"

namespace bohrgap {

inline constexpr const char* kVersion = BOHRGAP_VERSION;

}  // namespace bohrgap
