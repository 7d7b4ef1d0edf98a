#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sosexit {

// Library-wide error type; thrown on contract violations (dimension
// mismatches, malformed inputs) and unrecoverable runtime failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// splitmix64 step: maps a 64-bit counter to a well-mixed 64-bit value.
// Used to derive independent per-path / per-batch RNG seeds from a
// master seed without sequential dependence.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

// FNV-1a over a byte buffer; stable across platforms, used to fingerprint
// problem files in reports.
inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace sosexit
