#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lacuna/error.hpp"

namespace lacuna {

/// C-infinity transition: 0 for u <= 0, 1 for u >= 1.
inline double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

/// Even cutoff, 1 on [-1/2, 1/2], 0 off (-5/8, 5/8).
inline double eta(double xi) { return smoothstep((0.625 - std::abs(xi)) / 0.125); }

/// Supported in [-1/2, 1/2] with psi(0) = 1.
inline double psi(double x) { return eta(1.25 * x); }

/// Smooth tailed indicator (1 + x^2)^{-5}.
inline double omega(double x) { return std::pow(1.0 + x * x, -5.0); }

/// Moderate decay (1 + x^2)^{-3/4}.
inline double phi_moderate(double x) { return std::pow(1.0 + x * x, -0.75); }

struct BumpProfile {
  enum class Kind { EtaCutoff, OmegaTail, PhiModerate };
  Kind kind = Kind::EtaCutoff;
  int smoothness_order = 4;

  double operator()(double x) const {
    switch (kind) {
      case Kind::EtaCutoff: return eta(x);
      case Kind::OmegaTail: return omega(x);
      case Kind::PhiModerate: return phi_moderate(x);
    }
    return 0.0;
  }
};

/// Centered second-order finite difference of order `k` (0..4) at x with step h.
template <typename F>
double central_difference(const F& f, double x, double h, int k) {
  switch (k) {
    case 0: return f(x);
    case 1: return (f(x + h) - f(x - h)) / (2 * h);
    case 2: return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
    case 3: return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h);
    case 4: return (f(x + 2 * h) - 4 * f(x + h) + 6 * f(x) - 4 * f(x - h) + f(x - 2 * h)) / (h * h * h * h);
    default: throw Error("central_difference: derivative order must be in 0..4");
  }
}

/// sup over a uniform grid of |d^k/dx^k f| on [a, b], estimated by central differences.
template <typename F>
double derivative_sup(const F& f, double a, double b, int k, int points = 512) {
  const double h = (b - a) / (points - 1);
  double best = 0.0;
  for (int i = 0; i < points; ++i) best = std::max(best, std::abs(central_difference(f, a + i * h, h, k)));
  return best;
}

}  // namespace lacuna
