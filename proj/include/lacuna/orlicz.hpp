#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lacuna/error.hpp"

namespace lacuna {

/// B_sigma(t) = t log(e+t)^sigma, or the exponential class exp(L^{1/sigma})
/// which is only evaluated through the p-sup norm (see exp_norm).
struct YoungFunction {
  enum class Kind { BLog, ExpDual };
  Kind kind = Kind::BLog;
  double sigma = 0.0;

  static YoungFunction blog(double sigma) { return {Kind::BLog, sigma}; }
  static YoungFunction exp_dual(double sigma) { return {Kind::ExpDual, sigma}; }

  double operator()(double t) const {
    require(kind == Kind::BLog, "YoungFunction: the exponential class has no pointwise formula here");
    if (sigma == 0.0) return t;
    return t * std::pow(std::log(std::numbers::e + t), sigma);
  }

  double derivative(double t) const {
    if (sigma == 0.0) return 1.0;
    const double g = std::log(std::numbers::e + t);
    return std::pow(g, sigma) + sigma * t * std::pow(g, sigma - 1.0) / (std::numbers::e + t);
  }
};

struct LocalAverage {
  double start = 0.0;
  double length = 0.0;
  double value = 0.0;
  YoungFunction young;
};

/// One evaluation of the Luxemburg constraint avg B(|f|/lambda) - 1.
struct LuxemburgStep {
  double lambda;
  double constraint;
};

namespace detail {

inline void check_samples(std::span<const double> a, const char* who) {
  require(!a.empty(), std::string(who) + ": empty restriction");
  for (double v : a) require(std::isfinite(v), std::string(who) + ": non-finite sample");
}

inline double mean(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v;
  return s / static_cast<double>(a.size());
}

inline std::vector<double> magnitudes(std::span<const std::complex<double>> f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::abs(f[i]);
  return out;
}

}  // namespace detail

/// Solves B(t) = 1 for t > 0 (the Luxemburg norm of the constant 1 is 1/t).
inline double young_unit_level(double sigma) {
  const YoungFunction B = YoungFunction::blog(sigma);
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
    const double mid = 0.5 * (lo + hi);
    (B(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Luxemburg average inf{lambda > 0 : avg B_sigma(|f|/lambda) <= 1} of the
/// magnitudes `a` under the normalized counting measure.
///
/// The bracket starts at lambda0 = mean|f| (constraint >= 0 there since
/// B(t) >= t) and grows by doubling. Inside the bracket, Newton steps in
/// log lambda are taken whenever they stay strictly inside it, otherwise the
/// bracket is bisected; iteration stops once |constraint| <= 1e-12.
inline double luxemburg_avg(std::span<const double> a, double sigma, std::vector<LuxemburgStep>* trace = nullptr) {
  detail::check_samples(a, "luxemburg_avg");
  require(sigma >= 0.0, "luxemburg_avg: sigma must be >= 0");
  double peak = 0.0;
  for (double v : a) {
    require(v >= 0.0, "luxemburg_avg: expects magnitudes");
    peak = std::max(peak, v);
  }
  if (peak == 0.0) return 0.0;
  const double m = detail::mean(a);
  if (sigma == 0.0) return m;

  const YoungFunction B = YoungFunction::blog(sigma);
  const double n = static_cast<double>(a.size());
  // Returns the constraint value and its derivative with respect to log lambda.
  auto eval = [&](double lambda) {
    double s = 0.0, ds = 0.0;
    for (double v : a) {
      if (v == 0.0) continue;
      const double t = v / lambda;
      s += B(t);
      ds -= B.derivative(t) * t;
    }
    const double h = s / n - 1.0;
    if (trace) trace->push_back({lambda, h});
    return std::pair{h, ds / n};
  };

  double lo = m, hi = m;
  auto [h, dh] = eval(hi);
  if (h <= 0.0) return m;  // only when |f| is essentially constant at a tiny level
  double h_lo = h, dh_lo = dh;
  while (h > 0.0) {
    lo = hi;
    h_lo = h;
    dh_lo = dh;
    hi *= 2.0;
    std::tie(h, dh) = eval(hi);
  }
  if (h == 0.0) return hi;
  // Newton from the lower end, whose constraint is positive.
  double x = lo, hx = h_lo, dhx = dh_lo;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(hx) <= 1e-12) return x;
    double next = x * std::exp(-hx / dhx);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    std::tie(hx, dhx) = eval(next);
    x = next;
    (hx > 0.0 ? lo : hi) = x;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return x;
}

inline double luxemburg_avg(std::span<const std::complex<double>> f, double sigma,
                            std::vector<LuxemburgStep>* trace = nullptr) {
  const auto a = detail::magnitudes(f);
  return luxemburg_avg(std::span<const double>(a), sigma, trace);
}

/// avg |f| log(e + |f| / avg|f|)^sigma, an explicit quantity equivalent to
/// the Luxemburg average.
inline double llogl_avg_equiv(std::span<const double> a, double sigma) {
  detail::check_samples(a, "llogl_avg_equiv");
  const double m = detail::mean(a);
  if (m == 0.0) return 0.0;
  if (sigma == 0.0) return m;
  double s = 0.0;
  for (double v : a) s += v * std::pow(std::log(std::numbers::e + v / m), sigma);
  return s / static_cast<double>(a.size());
}

/// exp(L^{1/sigma}) average via max_p p^{-sigma} avg(|f|^p)^{1/p}, p = 2, 3, ...
/// The scan stops after two successive decreases once p >= 32 (hard cap p_cap).
inline double exp_norm(std::span<const double> a, double sigma, int p_cap = 4096) {
  detail::check_samples(a, "exp_norm");
  require(sigma > 0.0, "exp_norm: sigma must be > 0 (use the sup norm for sigma = 0)");
  double peak = 0.0;
  for (double v : a) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  double best = 0.0, prev = -1.0;
  int decreases = 0;
  for (int p = 2; p <= p_cap; ++p) {
    double s = 0.0;
    for (double v : a) s += std::pow(std::abs(v) / peak, p);
    const double value = std::pow(static_cast<double>(p), -sigma) * peak * std::pow(s / static_cast<double>(a.size()), 1.0 / p);
    best = std::max(best, value);
    decreases = (prev >= 0.0 && value < prev) ? decreases + 1 : 0;
    prev = value;
    if (decreases >= 2 && p >= 32) break;
  }
  return best;
}

/// Integral of B_sigma(|f|/alpha) against cell width dx.
inline double orlicz_integral(std::span<const double> a, double sigma, double alpha, double dx) {
  require(alpha > 0.0, "orlicz_integral: alpha must be > 0");
  const YoungFunction B = YoungFunction::blog(sigma);
  double s = 0.0;
  for (double v : a) s += B(v / alpha);
  return s * dx;
}

/// max over the grid of B(st) / (B(s) B(t)).
inline double submultiplicativity_ratio(double sigma, std::span<const double> s_grid, std::span<const double> t_grid) {
  const YoungFunction B = YoungFunction::blog(sigma);
  double worst = 0.0;
  for (double s : s_grid)
    for (double t : t_grid) worst = std::max(worst, B(s * t) / (B(s) * B(t)));
  return worst;
}

/// Dyadic Orlicz maximal function: for every sample, the largest Luxemburg
/// average over dyadic intervals of the tree (root = whole array, leaves =
/// single cells) that contain it. The sample count must be a power of two.
inline std::vector<double> orlicz_maximal_dyadic(std::span<const double> a, double sigma) {
  detail::check_samples(a, "orlicz_maximal_dyadic");
  require(std::has_single_bit(a.size()), "orlicz_maximal_dyadic: sample count must be a power of two (tree root)");
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t width = n; width >= 1; width /= 2) {
    for (std::size_t start = 0; start < n; start += width) {
      const double v = luxemburg_avg(a.subspan(start, width), sigma);
      for (std::size_t i = start; i < start + width; ++i) out[i] = std::max(out[i], v);
    }
  }
  return out;
}

}  // namespace lacuna
