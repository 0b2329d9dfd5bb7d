#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "lacuna/bumps.hpp"
#include "lacuna/czd.hpp"
#include "lacuna/lacunary.hpp"
#include "lacuna/signal.hpp"

namespace lacuna::harness {

enum class Family { SmoothBumps, LacunaryPolynomial, CzBadPart };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::SmoothBumps: return "bumps";
    case Family::LacunaryPolynomial: return "lacpoly";
    default: return "czbad";
  }
}

inline constexpr Family kAllFamilies[] = {Family::SmoothBumps, Family::LacunaryPolynomial, Family::CzBadPart};

/// Where samples live: support [left, left + length) inside the grid window
/// [-T/2, T/2).
struct EnsembleSpec {
  double left = -0.5;
  double length = 1.0;
  int order = 2;              // lacunary order of the sign polynomials
  DyadicScalar max_freq = DyadicScalar::pow2(7);
  int cz_sigma = 1;
  double cz_alpha_factor = 2.0;  // alpha = factor * mean |f| over the support
};

/// A sample defined independently of the grid, so paired runs at J and J + 2
/// see the same function.
struct TestFunction {
  Family family;
  std::string label;
  std::function<Signal(int J, double T)> sample;
};

inline std::mt19937_64 seeded(std::uint64_t seed, Family fam, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fam), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

/// Rough data on [-1/2, 1/2): Gaussian bumps plus integrable spikes, with a
/// modulated imaginary part.
inline std::function<cplx(double)> rough_profile(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-0.4, 0.4), W(0.01, 0.1);
  std::normal_distribution<double> G;
  auto p = std::make_shared<std::vector<double>>();  // c, w, amp triples, then spikes, then phase
  for (int i = 0; i < 3; ++i) {
    p->push_back(U(rng));
    p->push_back(W(rng));
    p->push_back(G(rng));
  }
  for (int i = 0; i < 2; ++i) p->push_back(U(rng));
  p->push_back(U(rng));
  return [p](double x) -> cplx {
    if (x < -0.5 || x >= 0.5) return 0.0;
    const auto& q = *p;
    double v = 0.0;
    for (int i = 0; i < 3; ++i) v += q[3 * i + 2] * std::exp(-std::pow((x - q[3 * i]) / q[3 * i + 1], 2));
    for (int i = 9; i < 11; ++i) v += 0.2 / std::sqrt(std::abs(x - q[i]) + 1e-4);
    return cplx(v, 0.3 * v * std::sin(9 * x + q[11]));
  };
}

inline Signal sample_on_window(int J, double T, const std::function<cplx(double)>& f) {
  return Signal::sample(J, T, -T / 2, f);
}

/// Sum of one to three compact bumps eta((x - c)/w) / w with complex
/// amplitudes, widths |S| 2^{-5..-2}, fully inside the support.
inline TestFunction smooth_bumps(const EnsembleSpec& s, std::mt19937_64 rng, std::string label) {
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> G;
  struct Bump {
    double c, w;
    cplx a;
  };
  auto bumps = std::make_shared<std::vector<Bump>>();
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const double w = s.length * std::exp2(-5.0 + 3.0 * U(rng));
    const double c = s.left + 0.625 * w + U(rng) * (s.length - 1.25 * w);
    bumps->push_back({c, w, cplx(G(rng), G(rng)) / w});
  }
  auto f = [bumps](double x) -> cplx {
    cplx v = 0.0;
    for (const auto& b : *bumps) v += b.a * eta((x - b.c) / b.w);
    return v;
  };
  return {Family::SmoothBumps, std::move(label), [f](int J, double T) { return sample_on_window(J, T, f); }};
}

/// n^{-1/2} sum eps_lambda e^{2 pi i lambda (x - a)} on the support, lambda
/// drawn without replacement from lac_order at scale 1/|S| up to max_freq,
/// n in {8, ..., 256} capped by the available frequencies.
inline TestFunction lacunary_polynomial(const EnsembleSpec& s, std::mt19937_64 rng, std::string label) {
  const auto scale = DyadicScalar::pow2(-static_cast<std::int32_t>(std::llround(std::log2(s.length))));
  const auto pts = lac_tau(s.order, scale, s.max_freq).points;
  require(!pts.empty(), "lacunary_polynomial: no frequencies");
  std::vector<double> freq;
  for (const auto& p : pts) freq.push_back(p.to_double());
  std::uniform_int_distribution<int> logn(3, 8);
  const auto n = std::min<std::size_t>(std::size_t{1} << logn(rng), freq.size());
  std::shuffle(freq.begin(), freq.end(), rng);
  freq.resize(n);
  std::sort(freq.begin(), freq.end());
  std::uniform_int_distribution<int> coin(0, 1);
  auto terms = std::make_shared<std::vector<std::pair<double, double>>>();
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (double lam : freq) terms->emplace_back(lam, coin(rng) ? norm : -norm);
  const double a = s.left, b = s.left + s.length;
  auto f = [terms, a, b](double x) -> cplx {
    if (x < a || x >= b) return 0.0;
    cplx v = 0.0;
    for (const auto& [lam, e] : *terms) v += std::polar(e, 2 * std::numbers::pi * lam * (x - a));
    return v;
  };
  return {Family::LacunaryPolynomial, std::move(label) + "-n" + std::to_string(n),
          [f](int J, double T) { return sample_on_window(J, T, f); }};
}

/// The cancellative atoms sum_J b_J of a CZ decomposition of rough data
/// placed on the support. The decomposition is recomputed on each grid.
inline TestFunction cz_bad_part(const EnsembleSpec& s, std::mt19937_64 rng, std::string label) {
  auto rough = rough_profile(rng);
  const double a = s.left, len = s.length;
  auto f = [rough, a, len](double x) { return rough((x - a) / len - 0.5); };
  const int sigma = s.cz_sigma;
  const double factor = s.cz_alpha_factor;
  return {Family::CzBadPart, std::move(label), [f, sigma, factor, a, len](int J, double T) {
            Signal raw = sample_on_window(J, T, f);
            double mass = 0.0;
            for (const auto& v : raw.samples) mass += std::abs(v);
            const double alpha = factor * mass * raw.dx() / len;
            const auto d = cz_decompose(raw, sigma, alpha);
            Signal b = Signal::zeros(J, T, -T / 2);
            for (const auto& atom : d.atoms)
              std::copy(atom.b.begin(), atom.b.end(), b.samples.begin() + static_cast<std::ptrdiff_t>(atom.first));
            return b;
          }};
}

inline TestFunction make_sample(Family fam, const EnsembleSpec& s, std::uint64_t seed, std::size_t index) {
  auto rng = seeded(seed, fam, index);
  std::string label = std::string(family_name(fam)) + "-" + std::to_string(index);
  switch (fam) {
    case Family::SmoothBumps: return smooth_bumps(s, rng, label);
    case Family::LacunaryPolynomial: return lacunary_polynomial(s, rng, label);
    default: return cz_bad_part(s, rng, label);
  }
}

inline std::vector<TestFunction> make_ensemble(const EnsembleSpec& s, std::span<const Family> families, std::size_t per_family,
                                               std::uint64_t seed) {
  std::vector<TestFunction> out;
  for (Family fam : families)
    for (std::size_t i = 0; i < per_family; ++i) out.push_back(make_sample(fam, s, seed, i));
  return out;
}

}  // namespace lacuna::harness
