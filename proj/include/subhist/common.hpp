#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace subhist {

inline constexpr const char* kToolVersion = "0.1.0";

// Rounds are 1-based throughout: t in [1, T].
using Round = std::int64_t;
using ArmId = int;

// Bad user-supplied parameters or config files. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated call contract between components. CLI maps this to exit code 3.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// --- Counter-based randomness -------------------------------------------
//
// All randomness in the library is derived by hashing integer keys with
// splitmix64. Cells are addressable without storing state, and results are
// identical across runs and platforms (pure integer + IEEE-754 ops).

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (splitmix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline std::uint64_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return hash_combine(hash_combine(a, b), c);
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in [-1, 1].
inline double uniform_pm1(std::uint64_t bits) {
  return 2.0 * uniform01(bits) - 1.0;
}

// --- Digests --------------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

// Shortest round-trip decimal form; locale-independent ('.' decimal, no grouping).
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// 17-significant-digit form used for content digests.
inline std::string format_double17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace subhist
