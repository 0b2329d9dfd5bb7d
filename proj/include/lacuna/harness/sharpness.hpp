#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "lacuna/harness/experiments.hpp"
#include "lacuna/multipliers.hpp"
#include "lacuna/orlicz.hpp"
#include "lacuna/spectral.hpp"

namespace lacuna::harness {

struct SharpnessOptions {
  std::vector<int> Ns;
  int J = 20;
  double T = 8.0;
  bool pointwise = true;                         // c_N from ||T_N f_N(x)|| at dyadic x
  std::vector<double> control_exponents{0.5, 1.0};
  int levels = 64;
  int khintchine = 0;                            // sign draws per N; 0 disables
  std::uint64_t seed = 7;
};

struct SharpnessPoint {
  int N = 0;
  std::size_t pairs = 0;
  double weak_norm = 0.0;    // L(N): weak L^1 norm over [-1/2, 1/2] of ||T_N g_N||
  double c = std::numeric_limits<double>::quiet_NaN();  // min over sampled x of ||T_N f_N(x)|| |x| / N
  std::size_t c_points = 0;
  std::vector<std::pair<double, double>> c_samples;  // (x, ||T_N f_N(x)|| |x| / N)
  double llogl = 0.0;        // ||g_N||_{L log L([-1/2, 1/2])}
  std::vector<double> control;  // weak-type ratio per control exponent
  double khintchine_error = std::numeric_limits<double>::quiet_NaN();  // relative L^2 error of the sign average
  double khintchine_best = std::numeric_limits<double>::quiet_NaN();   // best signed weak norm / L(N)
};

struct SharpnessReport {
  SharpnessOptions options;
  std::vector<int> skipped;  // infeasible N for the grid
  int max_feasible = 0;
  std::vector<SharpnessPoint> points;
  double slope = std::numeric_limits<double>::quiet_NaN();    // log L(N) vs log N
  double c_min = std::numeric_limits<double>::quiet_NaN();
  double c_max = std::numeric_limits<double>::quiet_NaN();
  double c_slope = std::numeric_limits<double>::quiet_NaN();  // log c_N vs log N
  // min over sampled x and consecutive N of c_{N'}(x) / c_N(x): at a fixed
  // point the constant should not decay as N grows.
  double c_fixed_x_ratio = std::numeric_limits<double>::quiet_NaN();
  double llogl_constant = 0.0;                                // max ||g_N||_{L log L} / N
  std::vector<double> control_growth;                         // last / first control ratio
  double khintchine_tolerance = std::numeric_limits<double>::quiet_NaN();

  nlohmann::json to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) {
      nlohmann::json e{{"N", p.N}, {"pairs", p.pairs}, {"weak_norm", p.weak_norm}, {"llogl", p.llogl}, {"control", p.control}};
      if (std::isfinite(p.c)) e["c"] = p.c;
      e["c_points"] = p.c_points;
      if (std::isfinite(p.khintchine_error)) e["khintchine_error"] = p.khintchine_error;
      if (std::isfinite(p.khintchine_best)) e["khintchine_best"] = p.khintchine_best;
      pts.push_back(std::move(e));
    }
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"id", "sharpness"},
            {"anchor", "||T_N g_N||_{L^{1,inf}([-1/2,1/2])} >~ N, ||T_N f_N(x)|| >= c N / |x|, ||g_N||_{L log^r L} <~ N^r"},
            {"J", options.J},
            {"T", options.T},
            {"Ns", options.Ns},
            {"levels", options.levels},
            {"khintchine", options.khintchine},
            {"seed", options.seed},
            {"control_exponents", options.control_exponents},
            {"max_feasible_N", max_feasible},
            {"skipped", skipped},
            {"points", pts},
            {"slope", num(slope)},
            {"c_min", num(c_min)},
            {"c_max", num(c_max)},
            {"c_slope", num(c_slope)},
            {"c_fixed_x_ratio", num(c_fixed_x_ratio)},
            {"llogl_constant", llogl_constant},
            {"control_growth", control_growth},
            {"khintchine_tolerance", num(khintchine_tolerance)}};
  }

  void write_csv(std::ostream& os) const {
    os.precision(17);
    os << "N,pairs,weak_norm,c,llogl";
    for (double r : options.control_exponents) os << ",control_r" << r;
    os << '\n';
    for (const auto& p : points) {
      os << p.N << ',' << p.pairs << ',' << p.weak_norm << ',' << (std::isfinite(p.c) ? p.c : 0.0) << ',' << p.llogl;
      for (double v : p.control) os << ',' << v;
      os << '\n';
    }
  }
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::log(x[i]) - mx;
    sxy += a * (std::log(y[i]) - my);
    sxx += a * a;
  }
  return sxy / sxx;
}

inline SharpnessReport sharpness_growth(const SharpnessOptions& opt) {
  SharpnessReport rep;
  rep.options = opt;
  rep.max_feasible = max_feasible_sharpness_N(opt.J, opt.T);
  if (opt.khintchine > 0) rep.khintchine_tolerance = 3.0 / std::sqrt(static_cast<double>(opt.khintchine));
  for (int N : opt.Ns) {
    if (N < 2 || N > rep.max_feasible) {
      rep.skipped.push_back(N);
      continue;
    }
    const auto fam = build_sharpness_family(N, opt.J, opt.T);
    SharpnessPoint p;
    p.N = N;
    p.pairs = fam.indices.size();
    const auto Sg = fam.vector_norm(fam.g_N);
    const double dx = Sg.dx();
    std::vector<double> out, in;
    std::vector<std::size_t> inner;
    for (std::size_t j = 0; j < Sg.size(); ++j)
      if (std::abs(Sg.x(j)) <= 0.5) {
        inner.push_back(j);
        out.push_back(Sg.samples[j].real());
        in.push_back(std::abs(fam.g_N.samples[j]));
      }
    p.weak_norm = weak_l1_norm(out, dx);
    p.llogl = luxemburg_avg(in, 1.0);
    for (double r : opt.control_exponents) p.control.push_back(weak_orlicz_ratio(out, in, dx, r, opt.levels).ratio);

    if (opt.pointwise) {
      const auto Sf = fam.vector_norm(fam.f_N);
      // x = +-2^{-e}, e = 2..floor(5N/8): grid points whenever 2^{-e} is a multiple of dx.
      for (int e = 2; 8 * e <= 5 * N; ++e) {
        for (int sgn : {-1, 1}) {
          const double x = sgn * std::ldexp(1.0, -e);
          const double pos = (x - Sf.offset) / dx;
          require(pos == std::floor(pos), "sharpness_growth: sample point is off the grid");
          const double v = Sf.samples[static_cast<std::size_t>(pos)].real() * std::abs(x) / N;
          p.c = std::isfinite(p.c) ? std::min(p.c, v) : v;
          p.c_samples.emplace_back(x, v);
          ++p.c_points;
        }
      }
    }

    if (opt.khintchine > 0) {
      // E|sum eps_i a_i|^2 = sum |a_i|^2: compare the sign average with ||T_N g_N||^2.
      std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(N));
      std::uniform_int_distribution<int> coin(0, 1);
      std::vector<double> mean(inner.size(), 0.0);
      double best = 0.0;
      std::vector<int> signs(fam.indices.size());
      for (int k = 0; k < opt.khintchine; ++k) {
        for (auto& s : signs) s = coin(rng) ? 1 : -1;
        const auto h = fam.signed_sum(fam.g_N, signs);
        std::vector<double> mag(inner.size());
        for (std::size_t i = 0; i < inner.size(); ++i) {
          mag[i] = std::abs(h.samples[inner[i]]);
          mean[i] += mag[i] * mag[i] / opt.khintchine;
        }
        best = std::max(best, weak_l1_norm(mag, dx));
      }
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < inner.size(); ++i) {
        num += mean[i];
        den += out[i] * out[i];
      }
      p.khintchine_error = std::abs(num - den) / den;
      p.khintchine_best = best / p.weak_norm;
    }
    rep.points.push_back(std::move(p));
  }

  std::vector<double> n, L, cn, cv;
  for (const auto& p : rep.points) {
    n.push_back(p.N);
    L.push_back(p.weak_norm);
    rep.llogl_constant = std::max(rep.llogl_constant, p.llogl / p.N);
    if (std::isfinite(p.c) && p.c > 0) {
      cn.push_back(p.N);
      cv.push_back(p.c);
    }
  }
  rep.slope = loglog_slope(n, L);
  if (!cv.empty()) {
    rep.c_min = *std::min_element(cv.begin(), cv.end());
    rep.c_max = *std::max_element(cv.begin(), cv.end());
    rep.c_slope = loglog_slope(cn, cv);
  }
  for (std::size_t i = 1; i < rep.points.size(); ++i)
    for (const auto& [x, v] : rep.points[i].c_samples)
      for (const auto& [x0, v0] : rep.points[i - 1].c_samples)
        if (x == x0 && v0 > 0) rep.c_fixed_x_ratio = std::isfinite(rep.c_fixed_x_ratio) ? std::min(rep.c_fixed_x_ratio, v / v0) : v / v0;
  for (std::size_t r = 0; r < opt.control_exponents.size(); ++r)
    rep.control_growth.push_back(rep.points.size() >= 2 && rep.points.front().control[r] > 0
                                     ? rep.points.back().control[r] / rep.points.front().control[r]
                                     : std::numeric_limits<double>::quiet_NaN());
  return rep;
}

}  // namespace lacuna::harness
