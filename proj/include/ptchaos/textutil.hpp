#pragma once

// Shared low-level text helpers: shortest round-trip double formatting
// (used by every serializer so outputs are byte-stable) and FNV-1a
// hashing for config fingerprints.

#include <cstdint>
#include <string>
#include <string_view>

namespace ptchaos {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// 64-bit FNV-1a over the bytes of `s`.
std::uint64_t fnv1a64(std::string_view s);

/// Lower-case hex rendering of a 64-bit hash, zero-padded to 16 chars.
std::string hash_hex(std::uint64_t h);

}  // namespace ptchaos
