#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pplab {

/// Invalid parameters, malformed specs, horizon mismatches.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation refused because its state space exceeds a guard.
class TractabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File reading/writing failures, reported with path context.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical, hashable encoding of a seller machine's behavioral state.
/// Two keys compare equal only if the machines behave identically on every
/// future decision sequence (given the same construction parameters).
struct StateKey {
  std::array<std::uint64_t, 6> words{};
  friend bool operator==(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint64_t w : k.words) {
      h ^= w;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

inline std::uint64_t double_bits(double x) noexcept {
  return std::bit_cast<std::uint64_t>(x);
}

inline std::string state_key_hex(const StateKey& k) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(k.words.size() * 16);
  for (std::uint64_t w : k.words)
    for (int shift = 60; shift >= 0; shift -= 4)
      out.push_back(digits[(w >> shift) & 0xf]);
  return out;
}

/// ceil(log2(log2(T))) computed in integers: smallest k with 2^(2^k) >= T.
inline int ceil_log2_log2(std::uint64_t T) {
  int k = 0;
  std::uint64_t e = 1;  // exponent of the current 2^(2^k)
  while (e < 64 && (std::uint64_t{1} << e) < T) {
    e *= 2;
    ++k;
  }
  return k;
}

/// Upper bound on the number of search phases used by fast search.
inline int phase_count_bound(std::uint64_t T) { return ceil_log2_log2(T) + 1; }

/// Sum of gamma^(t-1) for t in [from, to], with 0^0 = 1 so the t = 1 term
/// survives at gamma = 0. Empty when from > to.
inline double discount_weight_sum(double gamma, std::int64_t from, std::int64_t to) {
  if (from > to) return 0.0;
  if (gamma == 0.0) return from == 1 ? 1.0 : 0.0;
  return (std::pow(gamma, double(from - 1)) - std::pow(gamma, double(to))) / (1.0 - gamma);
}

}  // namespace pplab
