#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lacuna/dyadic.hpp"
#include "lacuna/error.hpp"

namespace lacuna {

/// Interval of a Littlewood-Paley collection with its order-(tau-1) parent.
/// Order-1 intervals have no stored parent (the parent is a half line) and
/// anchor 0.
struct LacInterval {
  DyadicScalar left;
  DyadicScalar right;
  int order = 0;
  std::optional<Interval> parent;
  DyadicScalar anchor;

  Interval interval() const { return {left, right}; }
  DyadicScalar length() const { return right - left; }
  DyadicScalar center() const { return (left + right).halved(); }

  friend bool operator==(const LacInterval&, const LacInterval&) = default;
  friend auto operator<=>(const LacInterval& a, const LacInterval& b) { return a.interval() <=> b.interval(); }
};

inline std::ostream& operator<<(std::ostream& os, const LacInterval& L) {
  return os << L.interval() << " order " << L.order << " anchor " << L.anchor;
}

struct WhitneyResult {
  std::vector<LacInterval> intervals;
  // Set when min_scale > |I|/4, i.e. truncation removed every piece.
  bool over_truncated = false;
};

namespace detail {

inline void require_pow2(const DyadicScalar& s, const char* what) {
  require(s.is_power_of_two(), std::string(what) + " must be a positive power of two, got " + s.to_string());
}

}  // namespace detail

/// Whitney pieces of the dyadic interval I with length at least min_scale:
/// [a+2^j, a+2^{j+1}) and [b-2^{j+1}, b-2^j) for min_scale <= 2^j <= |I|/4.
/// Each piece is anchored at the nearer endpoint of I.
inline WhitneyResult whitney(const Interval& I, const DyadicScalar& min_scale, int order = 0) {
  detail::require_pow2(min_scale, "min_scale");
  require(I.is_dyadic(), "whitney: " + I.to_string() + " is not a dyadic interval");
  WhitneyResult out;
  const DyadicScalar quarter = I.length().scaled(-2);
  if (min_scale > quarter) {
    out.over_truncated = true;
    return out;
  }
  for (DyadicScalar s = min_scale; s <= quarter; s = s.doubled()) {
    out.intervals.push_back({I.left + s, I.left + s.doubled(), order, I, I.left});
    out.intervals.push_back({I.right - s.doubled(), I.right - s, order, I, I.right});
  }
  std::sort(out.intervals.begin(), out.intervals.end());
  return out;
}

/// Lambda_1 truncated: +-[2^k, 2^{k+1}) with min_scale <= 2^k and 2^{k+1} <= max_abs.
inline std::vector<LacInterval> lambda_one(const DyadicScalar& min_scale, const DyadicScalar& max_abs) {
  std::vector<LacInterval> out;
  for (DyadicScalar s = min_scale; s.doubled() <= max_abs; s = s.doubled()) {
    out.push_back({s, s.doubled(), 1, std::nullopt, DyadicScalar{}});
    out.push_back({-s.doubled(), -s, 1, std::nullopt, DyadicScalar{}});
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Lambda_tau^{min_scale} inside [-max_abs, max_abs]: iterated Whitney
/// decompositions of Lambda_1, keeping pieces of length >= min_scale.
inline std::vector<LacInterval> lambda_tau(int order, const DyadicScalar& min_scale, const DyadicScalar& max_abs) {
  require(order >= 1, "lambda_tau: order must be >= 1 (Lambda_0 is the half-line sentinel)");
  detail::require_pow2(min_scale, "min_scale");
  detail::require_pow2(max_abs, "max_abs");
  std::vector<LacInterval> level = lambda_one(min_scale, max_abs);
  for (int t = 2; t <= order; ++t) {
    std::vector<LacInterval> next;
    for (const auto& L : level) {
      auto pieces = whitney(L.interval(), min_scale, t).intervals;
      next.insert(next.end(), pieces.begin(), pieces.end());
    }
    level = std::move(next);
  }
  std::sort(level.begin(), level.end());
  return level;
}

/// Lambda_tau pieces whose parent is the given order-(tau-1) interval.
inline std::vector<LacInterval> children(const LacInterval& parent, const DyadicScalar& min_scale) {
  return whitney(parent.interval(), min_scale, parent.order + 1).intervals;
}

struct LacPointSet {
  int order = 0;
  DyadicScalar min_scale;
  DyadicScalar max_abs;
  std::vector<DyadicScalar> points;  // sorted, distinct

  bool contains(const DyadicScalar& x) const { return std::binary_search(points.begin(), points.end(), x); }
  friend bool operator==(const LacPointSet&, const LacPointSet&) = default;
};

namespace detail {

inline void sort_unique(std::vector<DyadicScalar>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace detail

/// lac_tau truncated to the lattice min_scale*Z and to |x| <= max_abs.
///
/// Endpoints of the interval collections of orders 1..tau are gathered at
/// scale min_scale/2 and restricted to the lattice. This is exactly the set
/// of signed sums +-2^{n_1} +- ... +- 2^{n_tau} (n_1 > ... > n_tau >= log2
/// min_scale) of modulus <= max_abs. Endpoints of order-tau intervals alone
/// would miss points such as 2^k or the midpoint of a length 2*min_scale
/// parent, which the signed-sum form produces.
inline LacPointSet lac_tau(int order, const DyadicScalar& min_scale, const DyadicScalar& max_abs) {
  require(order >= 0, "lac_tau: order must be >= 0");
  detail::require_pow2(min_scale, "min_scale");
  detail::require_pow2(max_abs, "max_abs");
  LacPointSet out{order, min_scale, max_abs, {}};
  if (order == 0) {
    out.points.push_back(DyadicScalar{});
    return out;
  }
  const std::int32_t lattice = min_scale.log2();
  const DyadicScalar fine = min_scale.halved();
  for (int rho = 1; rho <= order; ++rho) {
    for (const auto& L : lambda_tau(rho, fine, max_abs)) {
      for (const auto& x : {L.left, L.right}) {
        if (x.is_multiple_of_pow2(lattice) && abs(x) <= max_abs) out.points.push_back(x);
      }
    }
  }
  detail::sort_unique(out.points);
  return out;
}

/// L* = L - anchor(L); an element of Lambda_1.
inline LacInterval normalize_to_origin(const LacInterval& L) {
  require(L.order >= 1, "normalize_to_origin: order must be >= 1");
  require(L.order == 1 || L.parent.has_value(), "normalize_to_origin: interval has no lineage");
  const Interval P = L.parent.value_or(Interval{});
  require(L.order == 1 || L.anchor == P.left || L.anchor == P.right,
          "normalize_to_origin: anchor is not an endpoint of the parent");
  LacInterval out{L.left - L.anchor, L.right - L.anchor, 1, std::nullopt, DyadicScalar{}};
  const DyadicScalar len = out.length();
  const bool positive = out.left == len && out.right == len.doubled();
  const bool negative = out.left == -len.doubled() && out.right == -len;
  require(positive || negative, "normalize_to_origin: " + L.interval().to_string() + " is not Whitney with respect to its anchor");
  return out;
}

/// {x / a : x in S}, with the truncation parameters dilated alongside.
inline LacPointSet dilate_set(const LacPointSet& S, const DyadicScalar& a) {
  detail::require_pow2(a, "dilation factor");
  const std::int32_t k = -a.log2();
  LacPointSet out{S.order, S.min_scale.scaled(k), S.max_abs.scaled(k), {}};
  out.points.reserve(S.points.size());
  for (const auto& x : S.points) out.points.push_back(x.scaled(k));
  return out;
}

/// Dilates an interval (and its lineage) by a power of two.
inline LacInterval dilate(const LacInterval& L, const DyadicScalar& a) {
  detail::require_pow2(a, "dilation factor");
  const std::int32_t k = a.log2();
  LacInterval out{L.left.scaled(k), L.right.scaled(k), L.order, std::nullopt, L.anchor.scaled(k)};
  if (L.parent) out.parent = Interval{L.parent->left.scaled(k), L.parent->right.scaled(k)};
  return out;
}

/// Finds I among Lambda_tau (untruncated) and returns it with lineage, or
/// nullopt when I is not an order-tau Littlewood-Paley interval.
inline std::optional<LacInterval> find_in_lambda(const Interval& I, int order) {
  require(order >= 1, "find_in_lambda: order must be >= 1");
  if (!(I.left < I.right) || !I.is_dyadic()) return std::nullopt;
  const DyadicScalar s = I.length();
  if (order == 1) {
    if ((I.left == s && I.right == s.doubled()) || (I.left == -s.doubled() && I.right == -s))
      return LacInterval{I.left, I.right, 1, std::nullopt, DyadicScalar{}};
    return std::nullopt;
  }
  // A Whitney piece of length s sits at distance s from one endpoint of a
  // parent of length >= 4s; the parent lies inside the Lambda_1 band
  // containing I, so its length is below 2 * max|endpoint|.
  const DyadicScalar reach = std::max(abs(I.left), abs(I.right)).doubled();
  for (DyadicScalar len = s.scaled(2); len <= reach; len = len.doubled()) {
    const Interval candidates[2] = {{I.left - s, I.left - s + len}, {I.right + s - len, I.right + s}};
    for (int side = 0; side < 2; ++side) {
      const Interval& P = candidates[side];
      if (!P.is_dyadic()) continue;
      if (auto parent = find_in_lambda(P, order - 1)) {
        return LacInterval{I.left, I.right, order, P, side == 0 ? P.left : P.right};
      }
    }
  }
  return std::nullopt;
}

/// One interval per line: order lm le rm re am ae (mantissa/exponent pairs).
inline void write_intervals(std::ostream& os, const std::vector<LacInterval>& intervals) {
  for (const auto& L : intervals) {
    os << L.order << ' ' << L.left.mantissa() << ' ' << L.left.exponent() << ' ' << L.right.mantissa() << ' '
       << L.right.exponent() << ' ' << L.anchor.mantissa() << ' ' << L.anchor.exponent() << '\n';
  }
}

/// Inverse of write_intervals. Lineage is rebuilt from the anchor: the parent
/// is the unique order-(tau-1) interval found by find_in_lambda.
inline std::vector<LacInterval> read_intervals(std::istream& is) {
  std::vector<LacInterval> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream in(line);
    int order = 0;
    std::int64_t lm = 0, rm = 0, am = 0;
    std::int32_t le = 0, re = 0, ae = 0;
    require(static_cast<bool>(in >> order >> lm >> le >> rm >> re >> am >> ae),
            "read_intervals: malformed line " + std::to_string(lineno));
    LacInterval L{DyadicScalar(lm, le), DyadicScalar(rm, re), order, std::nullopt, DyadicScalar(am, ae)};
    if (order >= 1) {
      auto found = find_in_lambda(L.interval(), order);
      require(found.has_value() && found->anchor == L.anchor,
              "read_intervals: line " + std::to_string(lineno) + " is not a valid order-" + std::to_string(order) + " interval");
      L = *found;
    }
    out.push_back(L);
  }
  return out;
}

}  // namespace lacuna
