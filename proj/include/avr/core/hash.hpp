#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace avr {

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes);

/// 16 lowercase hex digits of fnv1a64(bytes).
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace avr
