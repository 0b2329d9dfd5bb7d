#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <ostream>
#include <string>

#include "lacuna/error.hpp"

namespace lacuna {

/// Exact dyadic rational mantissa * 2^exponent. Canonical form keeps the
/// mantissa odd (zero is 0 * 2^0), so equality is structural. Results that do
/// not fit a 64-bit mantissa throw instead of rounding.
class DyadicScalar {
 public:
  constexpr DyadicScalar() = default;
  constexpr DyadicScalar(std::int64_t mantissa, std::int32_t exponent = 0)  // NOLINT(google-explicit-constructor)
      : mantissa_(mantissa), exponent_(exponent) {
    canonicalize();
  }

  static constexpr DyadicScalar pow2(std::int32_t k) { return DyadicScalar(1, k); }

  /// Exact conversion of a finite double (every finite double is dyadic).
  static DyadicScalar from_double(double v) {
    require(std::isfinite(v), "DyadicScalar: non-finite value");
    if (v == 0.0) return {};
    int e = 0;
    const double frac = std::frexp(v, &e);  // v = frac * 2^e, 0.5 <= |frac| < 1
    return DyadicScalar(static_cast<std::int64_t>(std::ldexp(frac, 53)), e - 53);
  }

  constexpr std::int64_t mantissa() const { return mantissa_; }
  constexpr std::int32_t exponent() const { return exponent_; }

  constexpr bool is_zero() const { return mantissa_ == 0; }
  constexpr int sign() const { return (mantissa_ > 0) - (mantissa_ < 0); }
  constexpr bool is_power_of_two() const { return mantissa_ == 1; }

  /// log2 of a positive power of two.
  std::int32_t log2() const {
    require(is_power_of_two(), "log2: " + to_string() + " is not a power of two");
    return exponent_;
  }

  /// True when the value lies in 2^k * Z.
  constexpr bool is_multiple_of_pow2(std::int32_t k) const { return is_zero() || exponent_ >= k; }

  /// Exponent of the leading bit of |value| (value != 0).
  constexpr std::int64_t top_bit() const {
    const auto mag = static_cast<std::uint64_t>(mantissa_ < 0 ? -mantissa_ : mantissa_);
    return static_cast<std::int64_t>(std::bit_width(mag)) - 1 + exponent_;
  }

  constexpr DyadicScalar operator-() const {
    DyadicScalar r;
    r.mantissa_ = -mantissa_;
    r.exponent_ = exponent_;
    return r;
  }

  /// Multiplies by 2^k exactly.
  constexpr DyadicScalar scaled(std::int32_t k) const {
    if (is_zero()) return {};
    DyadicScalar r = *this;
    r.exponent_ += k;
    return r;
  }
  constexpr DyadicScalar doubled() const { return scaled(1); }
  constexpr DyadicScalar halved() const { return scaled(-1); }

  friend DyadicScalar operator+(const DyadicScalar& a, const DyadicScalar& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const std::int32_t e = std::min(a.exponent_, b.exponent_);
    const __int128 sum = shifted(a, a.exponent_ - e) + shifted(b, b.exponent_ - e);
    return from_wide(sum, e);
  }
  friend DyadicScalar operator-(const DyadicScalar& a, const DyadicScalar& b) { return a + (-b); }

  friend DyadicScalar operator*(const DyadicScalar& a, const DyadicScalar& b) {
    const __int128 prod = static_cast<__int128>(a.mantissa_) * b.mantissa_;
    return from_wide(prod, a.exponent_ + b.exponent_);
  }

  DyadicScalar& operator+=(const DyadicScalar& o) { return *this = *this + o; }
  DyadicScalar& operator-=(const DyadicScalar& o) { return *this = *this - o; }

  friend constexpr bool operator==(const DyadicScalar&, const DyadicScalar&) = default;

  friend std::strong_ordering operator<=>(const DyadicScalar& a, const DyadicScalar& b) {
    if (a.sign() != b.sign()) return a.sign() <=> b.sign();
    if (a.is_zero()) return std::strong_ordering::equal;
    // Same nonzero sign: leading bits decide unless they coincide, in which
    // case the exponent gap is below 64 and a wide subtraction is safe.
    const auto ta = a.top_bit();
    const auto tb = b.top_bit();
    if (ta != tb) return a.sign() > 0 ? ta <=> tb : tb <=> ta;
    const std::int32_t e = std::min(a.exponent_, b.exponent_);
    const __int128 diff = shifted(a, a.exponent_ - e) - shifted(b, b.exponent_ - e);
    return diff <=> static_cast<__int128>(0);
  }

  double to_double() const { return std::ldexp(static_cast<double>(mantissa_), exponent_); }

  /// "p", "p/q" with q a power of two, or "m*2^e" for huge exponents.
  std::string to_string() const {
    if (exponent_ >= 0 && exponent_ < 62 && top_bit() < 62) return std::to_string(mantissa_ << exponent_);
    if (exponent_ < 0 && exponent_ > -63) return std::to_string(mantissa_) + "/" + std::to_string(std::int64_t{1} << -exponent_);
    return std::to_string(mantissa_) + "*2^" + std::to_string(exponent_);
  }

  /// Accepts "-7", "5/4", "2^-3", "3*2^-5".
  static DyadicScalar parse(const std::string& text) {
    auto to_i64 = [&](const std::string& s) -> std::int64_t {
      std::size_t used = 0;
      std::int64_t v = 0;
      try {
        v = std::stoll(s, &used);
      } catch (...) {
        used = 0;
      }
      require(used == s.size() && !s.empty(), "not a dyadic rational: '" + text + "'");
      return v;
    };
    if (auto star = text.find("*2^"); star != std::string::npos) {
      return DyadicScalar(to_i64(text.substr(0, star)),
                          static_cast<std::int32_t>(to_i64(text.substr(star + 3))));
    }
    if (text.rfind("2^", 0) == 0) return pow2(static_cast<std::int32_t>(to_i64(text.substr(2))));
    if (auto slash = text.find('/'); slash != std::string::npos) {
      const std::int64_t q = to_i64(text.substr(slash + 1));
      require(q > 0 && std::has_single_bit(static_cast<std::uint64_t>(q)),
              "denominator must be a power of two: '" + text + "'");
      return DyadicScalar(to_i64(text.substr(0, slash)),
                          -static_cast<std::int32_t>(std::countr_zero(static_cast<std::uint64_t>(q))));
    }
    return DyadicScalar(to_i64(text));
  }

 private:
  constexpr void canonicalize() {
    if (mantissa_ == 0) {
      exponent_ = 0;
      return;
    }
    const int tz = std::countr_zero(static_cast<std::uint64_t>(mantissa_));
    mantissa_ >>= tz;  // arithmetic shift keeps the sign
    exponent_ += tz;
  }

  static __int128 shifted(const DyadicScalar& x, std::int32_t shift) {
    // Callers guarantee |mantissa| * 2^shift fits comfortably in 127 bits.
    if (shift > 62) throw Error("dyadic arithmetic overflow (exponent gap " + std::to_string(shift) + ")");
    return static_cast<__int128>(x.mantissa_) << shift;
  }

  static DyadicScalar from_wide(__int128 value, std::int32_t exponent) {
    if (value == 0) return {};
    while ((value & 1) == 0) {
      value >>= 1;
      ++exponent;
    }
    if (value > std::numeric_limits<std::int64_t>::max() || value < std::numeric_limits<std::int64_t>::min())
      throw Error("dyadic arithmetic overflow (mantissa exceeds 64 bits)");
    return DyadicScalar(static_cast<std::int64_t>(value), exponent);
  }

  std::int64_t mantissa_ = 0;
  std::int32_t exponent_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const DyadicScalar& x) { return os << x.to_string(); }

inline DyadicScalar abs(const DyadicScalar& x) { return x.sign() < 0 ? -x : x; }

/// Half-open interval [left, right) with dyadic endpoints.
struct Interval {
  DyadicScalar left;
  DyadicScalar right;

  DyadicScalar length() const { return right - left; }
  DyadicScalar center() const { return (left + right).halved(); }
  bool contains(const DyadicScalar& x) const { return left <= x && x < right; }
  bool contains(const Interval& o) const { return left <= o.left && o.right <= right; }
  bool intersects(const Interval& o) const { return left < o.right && o.left < right; }
  /// Length a power of two and left endpoint a multiple of the length.
  bool is_dyadic() const {
    const DyadicScalar len = length();
    return len.is_power_of_two() && left.is_multiple_of_pow2(len.exponent());
  }
  friend bool operator==(const Interval&, const Interval&) = default;
  friend auto operator<=>(const Interval& a, const Interval& b) {
    if (auto c = a.left <=> b.left; c != 0) return c;
    return a.right <=> b.right;
  }
  std::string to_string() const { return "[" + left.to_string() + "," + right.to_string() + ")"; }
};

inline std::ostream& operator<<(std::ostream& os, const Interval& I) { return os << I.to_string(); }

/// Distance between the closures of two intervals.
inline DyadicScalar distance(const Interval& a, const Interval& b) {
  if (a.right <= b.left) return b.left - a.right;
  if (b.right <= a.left) return a.left - b.right;
  return {};
}

/// dist(I, R \ P) for I inside P: gap to the nearer endpoint of P.
inline DyadicScalar distance_to_complement(const Interval& I, const Interval& P) {
  return std::min(I.left - P.left, P.right - I.right);
}

/// Distance from a point to an interval's closure.
inline DyadicScalar distance(const Interval& I, const DyadicScalar& x) {
  if (x < I.left) return I.left - x;
  if (x > I.right) return x - I.right;
  return {};
}

}  // namespace lacuna

template <>
struct std::hash<lacuna::DyadicScalar> {
  std::size_t operator()(const lacuna::DyadicScalar& x) const noexcept {
    return std::hash<std::int64_t>{}(x.mantissa()) ^ (std::hash<std::int32_t>{}(x.exponent()) << 1);
  }
};
