#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lacuna/error.hpp"
#include "lacuna/orlicz.hpp"

namespace lacuna {

/// Real function on [0,1) sampled on the 2^J level-J dyadic cells.
struct DyadicFunction {
  std::vector<double> samples;
  int max_level = 0;

  DyadicFunction() = default;
  explicit DyadicFunction(std::vector<double> s) : samples(std::move(s)) {
    require(!samples.empty() && std::has_single_bit(samples.size()), "DyadicFunction: sample count must be a power of two");
    max_level = std::countr_zero(samples.size());
  }
  static DyadicFunction zeros(int J) {
    require(J >= 0 && J < 31, "DyadicFunction: level out of range");
    return DyadicFunction(std::vector<double>(std::size_t{1} << J, 0.0));
  }
  template <typename F>
  static DyadicFunction sample_midpoints(int J, F&& f) {
    auto out = zeros(J);
    const double h = std::ldexp(1.0, -J);
    for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] = f((static_cast<double>(i) + 0.5) * h);
    return out;
  }

  std::size_t size() const { return samples.size(); }
  double dx() const { return std::ldexp(1.0, -max_level); }

  DyadicFunction& operator+=(const DyadicFunction& o) {
    require(o.size() == size(), "DyadicFunction: size mismatch");
    for (std::size_t i = 0; i < size(); ++i) samples[i] += o.samples[i];
    return *this;
  }
  DyadicFunction& operator-=(const DyadicFunction& o) {
    require(o.size() == size(), "DyadicFunction: size mismatch");
    for (std::size_t i = 0; i < size(); ++i) samples[i] -= o.samples[i];
    return *this;
  }
  friend DyadicFunction operator+(DyadicFunction a, const DyadicFunction& b) { return a += b; }
  friend DyadicFunction operator-(DyadicFunction a, const DyadicFunction& b) { return a -= b; }
};

namespace detail {

// Block means at every level, built by pairwise averaging from the leaves.
// Every E_k reads from the same pyramid, which makes the tower property exact.
inline std::vector<std::vector<double>> mean_pyramid(const DyadicFunction& f) {
  std::vector<std::vector<double>> pyr(static_cast<std::size_t>(f.max_level) + 1);
  pyr[static_cast<std::size_t>(f.max_level)] = f.samples;
  for (int k = f.max_level - 1; k >= 0; --k) {
    const auto& fine = pyr[static_cast<std::size_t>(k) + 1];
    auto& coarse = pyr[static_cast<std::size_t>(k)];
    coarse.resize(fine.size() / 2);
    for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
  }
  return pyr;
}

// Level-k means only, with the same pairwise order as mean_pyramid.
inline std::vector<double> level_means(const std::vector<double>& leaves, int k) {
  std::vector<double> cur(leaves);
  while (cur.size() > (std::size_t{1} << k)) {
    const std::size_t half = cur.size() / 2;
    for (std::size_t i = 0; i < half; ++i) cur[i] = 0.5 * (cur[2 * i] + cur[2 * i + 1]);
    cur.resize(half);
  }
  return cur;
}

inline DyadicFunction spread(const std::vector<double>& level_values, int J) {
  auto out = DyadicFunction::zeros(J);
  const std::size_t width = out.size() / level_values.size();
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] = level_values[i / width];
  return out;
}

}  // namespace detail

/// E_k f: averages over the level-k dyadic intervals.
inline DyadicFunction expectation(const DyadicFunction& f, int k) {
  require(k >= 0 && k <= f.max_level, "expectation: level out of range");
  auto pyr = detail::mean_pyramid(f);
  return detail::spread(pyr[static_cast<std::size_t>(k)], f.max_level);
}

/// D_k f = E_k f - E_{k-1} f, and D_0 f = E_0 f.
inline DyadicFunction difference(const DyadicFunction& f, int k) {
  require(k >= 0 && k <= f.max_level, "difference: level out of range");
  auto pyr = detail::mean_pyramid(f);
  auto out = detail::spread(pyr[static_cast<std::size_t>(k)], f.max_level);
  if (k > 0) out -= detail::spread(pyr[static_cast<std::size_t>(k) - 1], f.max_level);
  return out;
}

struct MartingaleDecomposition {
  std::vector<DyadicFunction> levels;  // D_0 f, ..., D_J f
  double e0 = 0.0;
};

inline MartingaleDecomposition martingale_decompose(const DyadicFunction& f) {
  auto pyr = detail::mean_pyramid(f);
  MartingaleDecomposition out;
  out.e0 = pyr[0][0];
  out.levels.push_back(detail::spread(pyr[0], f.max_level));
  for (int k = 1; k <= f.max_level; ++k) {
    auto d = detail::spread(pyr[static_cast<std::size_t>(k)], f.max_level);
    d -= detail::spread(pyr[static_cast<std::size_t>(k) - 1], f.max_level);
    out.levels.push_back(std::move(d));
  }
  return out;
}

/// S f = (sum_{k >= 1} |D_k f|^2)^{1/2}.
inline DyadicFunction martingale_square_function(const DyadicFunction& f) {
  auto dec = martingale_decompose(f);
  auto out = DyadicFunction::zeros(f.max_level);
  for (std::size_t k = 1; k < dec.levels.size(); ++k)
    for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += dec.levels[k].samples[i] * dec.levels[k].samples[i];
  for (auto& v : out.samples) v = std::sqrt(v);
  return out;
}

/// Builds f from Haar coefficients: coeffs[k][j] multiplies the Haar function
/// of the j-th level-k interval (+1 on its left half, -1 on its right half).
inline DyadicFunction from_haar(double mean, const std::vector<std::vector<double>>& coeffs, int J) {
  require(static_cast<int>(coeffs.size()) <= J, "from_haar: too many levels");
  auto out = DyadicFunction::zeros(J);
  std::fill(out.samples.begin(), out.samples.end(), mean);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    require(coeffs[k].size() == (std::size_t{1} << k), "from_haar: level k needs 2^k coefficients");
    const std::size_t width = out.size() >> k;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::size_t offset = i % width;
      out.samples[i] += coeffs[k][i / width] * (offset < width / 2 ? 1.0 : -1.0);
    }
  }
  return out;
}

struct TailCheck {
  double lambda;
  double measure;
  double bound;  // 2 exp(-lambda^2 / 2)
};

struct CwwReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double sup_square = 0.0;
  bool tail_checked = false;
  bool tail_ok = true;
  std::vector<TailCheck> tails;
};

/// ||f - E_0 f||_{exp(L^{2/(sigma+1)})} against ||S f||_{exp(L^{2/sigma})}
/// (the sup norm when sigma = 0), both as p-sup norms. When ||S f||_inf <= 1
/// the sub-Gaussian tail 2 exp(-lambda^2/2) is checked at the given levels.
inline CwwReport cww_check(const DyadicFunction& f, double sigma, std::span<const double> tail_levels = {}) {
  require(sigma >= 0.0, "cww_check: sigma must be >= 0");
  auto pyr = detail::mean_pyramid(f);
  const double e0 = pyr[0][0];
  std::vector<double> centered(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) centered[i] = std::abs(f.samples[i] - e0);
  const auto S = martingale_square_function(f);

  CwwReport r;
  r.sup_square = *std::max_element(S.samples.begin(), S.samples.end());
  r.lhs = exp_norm(centered, 0.5 * (sigma + 1.0));
  r.rhs = sigma == 0.0 ? r.sup_square : exp_norm(S.samples, 0.5 * sigma);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;

  if (r.sup_square <= 1.0 + 1e-12) {
    r.tail_checked = true;
    for (double lambda : tail_levels) {
      double measure = 0.0;
      for (double v : centered) measure += v > lambda;
      measure /= static_cast<double>(f.size());
      const double bound = 2.0 * std::exp(-0.5 * lambda * lambda);
      r.tails.push_back({lambda, measure, bound});
      r.tail_ok = r.tail_ok && measure <= bound;
    }
  }
  return r;
}

struct SolverConfig {
  int max_iter = 5000;
  double epsilon_rel = 1e-6;  // smoothing epsilon relative to ||f||_2
  double rel_decrease = 1e-6;
  int window = 20;
  double initial_step = 1.0;
};

struct DecompositionCertificate {
  double objective = 0.0;          // unsmoothed, at the returned iterate
  double trivial_objective = 0.0;  // psi = 0
  double reference_norm = 0.0;     // ||f||_{L log^{(sigma+1)/2} L}
  double max_constraint_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // smoothed objective per accepted iterate
};

struct ThmSecondResult {
  std::vector<DyadicFunction> f_k;  // D_k f + psi_k, k = 0..J
  std::vector<DyadicFunction> psi;
  DecompositionCertificate certificate;
};

/// Luxemburg B_{sigma/2} norm of (sum_k |g_k|^2 + eps^2)^{1/2}.
inline double thm_second_objective(const std::vector<DyadicFunction>& g, double sigma, double eps = 0.0) {
  require(!g.empty(), "thm_second_objective: no levels");
  std::vector<double> u(g[0].size(), eps * eps);
  for (const auto& gk : g)
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += gk.samples[i] * gk.samples[i];
  for (auto& v : u) v = std::sqrt(v);
  return luxemburg_avg(u, 0.5 * sigma);
}

/// Removes the D_k component, which is the orthogonal projection onto
/// {psi : D_k psi = 0}.
inline void project_admissible(DyadicFunction& psi, int k) {
  require(k >= 0 && k <= psi.max_level, "project_admissible: level out of range");
  auto fine = detail::level_means(psi.samples, k);
  const std::size_t w = psi.size() / fine.size();
  if (k == 0) {
    for (auto& v : psi.samples) v -= fine[0];
    return;
  }
  std::vector<double> coarse(fine.size() / 2);
  for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
  for (std::size_t i = 0; i < psi.size(); ++i) psi.samples[i] -= fine[i / w] - coarse[i / (2 * w)];
}

namespace detail {

inline std::vector<DyadicFunction> shifted(const std::vector<DyadicFunction>& base, const std::vector<DyadicFunction>& psi) {
  std::vector<DyadicFunction> out(base);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += psi[k];
  return out;
}

// u_i = (eps^2 + sum_k |base_k + psi_k - step dir_k|^2)^{1/2}; dir may be null.
inline void smoothed_magnitude(const std::vector<DyadicFunction>& base, const std::vector<DyadicFunction>& psi,
                               const std::vector<DyadicFunction>* dir, double step, double eps, std::vector<double>& u) {
  const std::size_t n = base[0].size();
  u.assign(n, eps * eps);
  for (std::size_t k = 0; k < base.size(); ++k) {
    const double* b = base[k].samples.data();
    const double* p = psi[k].samples.data();
    if (dir) {
      const double* d = (*dir)[k].samples.data();
      for (std::size_t i = 0; i < n; ++i) {
        const double g = b[i] + p[i] - step * d[i];
        u[i] += g * g;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double g = b[i] + p[i];
        u[i] += g * g;
      }
    }
  }
  for (auto& v : u) v = std::sqrt(v);
}

// Gradient of lambda(u) with respect to psi_k. lambda solves avg B(u/lambda) = 1,
// so d lambda / d u_i = lambda B'(u_i/lambda) / sum_j B'(u_j/lambda) u_j (the
// 1/n factors cancel) and du_i/dpsi_{k,i} = g_{k,i} / u_i.
inline void smoothed_gradient(const std::vector<DyadicFunction>& base, const std::vector<DyadicFunction>& psi,
                              const std::vector<double>& u, double lambda, double sigma, std::vector<DyadicFunction>& grad) {
  const std::size_t n = u.size();
  const YoungFunction B = YoungFunction::blog(0.5 * sigma);
  std::vector<double> w(n);
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = B.derivative(u[i] / lambda);
    denom += w[i] * u[i];
  }
  for (std::size_t i = 0; i < n; ++i) w[i] *= lambda / (denom * u[i]);
  grad.resize(base.size());
  for (std::size_t k = 0; k < base.size(); ++k) {
    grad[k].samples.resize(n);
    grad[k].max_level = base[k].max_level;
    for (std::size_t i = 0; i < n; ++i) grad[k].samples[i] = w[i] * (base[k].samples[i] + psi[k].samples[i]);
  }
}

inline double inner(const std::vector<DyadicFunction>& a, const std::vector<DyadicFunction>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].size(); ++i) s += a[k].samples[i] * b[k].samples[i];
  return s;
}

}  // namespace detail

/// Approximate minimizer of F(psi) = ||(sum_k |D_k f + psi_k|^2)^{1/2}||_{L log^{sigma/2} L}
/// over psi with D_k psi_k = 0: projected gradient descent on the
/// epsilon-smoothed objective with Armijo backtracking. The returned iterate
/// is the best one seen under the unsmoothed objective.
inline ThmSecondResult decompose_thm_second(const DyadicFunction& f, double sigma, const SolverConfig& cfg = {}) {
  require(sigma >= 0.0, "decompose_thm_second: sigma must be >= 0");
  const int J = f.max_level;
  auto dec = martingale_decompose(f);
  const auto& base = dec.levels;
  const double s_half = 0.5 * sigma;

  double l2 = 0.0;
  for (double v : f.samples) l2 += v * v;
  l2 = std::sqrt(l2 * f.dx());
  const double eps = cfg.epsilon_rel * l2;

  ThmSecondResult res;
  res.psi.assign(base.size(), DyadicFunction::zeros(J));
  auto& cert = res.certificate;
  std::vector<double> absf(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) absf[i] = std::abs(f.samples[i]);
  cert.reference_norm = luxemburg_avg(absf, 0.5 * (sigma + 1.0));
  cert.trivial_objective = thm_second_objective(base, sigma);

  auto best_psi = res.psi;
  double best = cert.trivial_objective;
  if (l2 == 0.0) {
    cert.converged = true;
  } else {
    std::vector<double> u, u_raw;
    std::vector<DyadicFunction> grad;
    detail::smoothed_magnitude(base, res.psi, nullptr, 0.0, eps, u);
    double value = luxemburg_avg(u, s_half);
    cert.trace.push_back(value);
    double step = cfg.initial_step;
    int it = 0;
    for (; it < cfg.max_iter; ++it) {
      detail::smoothed_gradient(base, res.psi, u, value, sigma, grad);
      for (int k = 0; k <= J; ++k) project_admissible(grad[static_cast<std::size_t>(k)], k);
      const double g2 = detail::inner(grad, grad);
      if (g2 <= 0.0) {
        cert.converged = true;
        break;
      }
      bool accepted = false;
      double trial_value = value;
      for (int bt = 0; bt < 60; ++bt) {
        detail::smoothed_magnitude(base, res.psi, &grad, step, eps, u);
        trial_value = luxemburg_avg(u, s_half);
        if (trial_value <= value - 1e-4 * step * g2) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        cert.converged = true;  // no descent left at machine precision
        break;
      }
      for (std::size_t k = 0; k < res.psi.size(); ++k)
        for (std::size_t i = 0; i < res.psi[k].size(); ++i) res.psi[k].samples[i] -= step * grad[k].samples[i];
      value = trial_value;
      cert.trace.push_back(value);
      detail::smoothed_magnitude(base, res.psi, nullptr, 0.0, 0.0, u_raw);
      const double raw = luxemburg_avg(u_raw, s_half);
      if (raw < best) {
        best = raw;
        best_psi = res.psi;
      }
      step *= 2.0;
      const auto m = cert.trace.size();
      if (m > static_cast<std::size_t>(cfg.window)) {
        const double old = cert.trace[m - 1 - static_cast<std::size_t>(cfg.window)];
        if (old - value < cfg.rel_decrease * old) {
          cert.converged = true;
          ++it;
          break;
        }
      }
    }
    cert.iterations = it;
  }

  res.psi = std::move(best_psi);
  res.f_k = detail::shifted(base, res.psi);
  cert.objective = best;
  for (int k = 0; k <= J; ++k) {
    const auto r = difference(res.psi[static_cast<std::size_t>(k)], k);
    for (double v : r.samples) cert.max_constraint_residual = std::max(cert.max_constraint_residual, std::abs(v));
  }
  return res;
}

}  // namespace lacuna
