// Copyright 2026 The locbal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOCBAL_COMMON_HPP_
#define LOCBAL_COMMON_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <boost/multiprecision/gmp.hpp>

namespace locbal {

using NodeId = std::size_t;
using EdgeId = std::size_t;

// Exact arithmetic used by the fractional algorithms and the verifier.
using Rational = boost::multiprecision::mpq_rational;

enum class ErrorKind {
  kInvalidSize,
  kInvalidParameter,
  kOutOfRange,
  kBudgetExceeded,
  kProtocolViolation,
  kUnsupportedTopology,
  kPreconditionViolation,
  kInfeasibleKernel,
  kInvalidTest,
  kDimensionMismatch,
  kParseError,
  kInternal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidSize: return "invalid-size";
    case ErrorKind::kInvalidParameter: return "invalid-parameter";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kBudgetExceeded: return "budget-exceeded";
    case ErrorKind::kProtocolViolation: return "protocol-violation";
    case ErrorKind::kUnsupportedTopology: return "unsupported-topology";
    case ErrorKind::kPreconditionViolation: return "precondition-violation";
    case ErrorKind::kInfeasibleKernel: return "infeasible-kernel";
    case ErrorKind::kInvalidTest: return "invalid-test";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kParseError: return "parse-error";
    case ErrorKind::kInternal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Internal consistency check that stays on in release builds. Algorithms in
// this library assert their own loop invariants through it.
inline void ensure(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorKind::kInternal, what);
}

/// SplitMix64 (Steele, Lea, Flood 2014). Every seeded generator in the
/// library uses this so that instances are reproducible across platforms;
/// std::mt19937 + std::uniform_int_distribution is not portable bit-for-bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound), by rejection.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return r % bound;
  }

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Derives an independent stream, e.g. one per node.
  SplitMix64 split() { return SplitMix64(next()); }

 private:
  std::uint64_t state_;
};

template <class Range>
void shuffle(Range& range, SplitMix64& rng) {
  using std::swap;
  const auto n = static_cast<std::uint64_t>(range.size());
  for (std::uint64_t i = n; i > 1; --i) {
    swap(range[i - 1], range[rng.below(i)]);
  }
}

// ---- numeric helpers shared by integer, rational and double loads -------

template <class Num>
inline constexpr bool kIsExact = !std::is_floating_point_v<Num>;

template <class Num>
Num abs_value(const Num& v) {
  return v < Num(0) ? Num(-v) : v;
}

template <class Num>
bool is_integral_value(const Num& v) {
  if constexpr (std::is_integral_v<Num>) {
    return true;
  } else if constexpr (std::is_floating_point_v<Num>) {
    return std::floor(v) == v;
  } else {
    return boost::multiprecision::denominator(v) == 1;
  }
}

template <class Num>
double to_double(const Num& v) {
  if constexpr (std::is_arithmetic_v<Num>) {
    return static_cast<double>(v);
  } else {
    return v.template convert_to<double>();
  }
}

template <class Num>
std::string format_number(const Num& v) {
  std::ostringstream out;
  if constexpr (std::is_floating_point_v<Num>) {
    out.precision(17);
  }
  out << v;
  return out.str();
}

template <class Num>
Num parse_number(const std::string& text) {
  try {
    if constexpr (std::is_integral_v<Num>) {
      std::size_t used = 0;
      const long long v = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return static_cast<Num>(v);
    } else if constexpr (std::is_floating_point_v<Num>) {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return static_cast<Num>(v);
    } else {
      return Num(text);
    }
  } catch (const std::exception&) {
    throw Error(ErrorKind::kParseError, "bad number '" + text + "'");
  }
}

}  // namespace locbal

#endif  // LOCBAL_COMMON_HPP_
