#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>

#include "lacuna/spectral.hpp"

using lacuna::cplx;
using lacuna::DyadicScalar;
using lacuna::LacInterval;
using lacuna::Signal;

namespace {

DyadicScalar d(std::int64_t m, std::int32_t e = 0) { return DyadicScalar(m, e); }

Signal tone(int J, double T, double x0, double xi, cplx amp = 1.0) {
  return Signal::sample(J, T, x0, [&](double x) { return amp * std::polar(1.0, 2 * std::numbers::pi * xi * x); });
}

Signal random_signal(std::mt19937_64& rng, int J, double T, double x0 = 0.0) {
  std::normal_distribution<double> g;
  return Signal::sample(J, T, x0, [&](double) { return cplx(g(rng), g(rng)); });
}

// Random signal whose spectrum lives on the bins of the given frequency windows.
Signal band_signal(std::mt19937_64& rng, int J, double T, const std::vector<LacInterval>& windows) {
  std::normal_distribution<double> g;
  Signal f = Signal::zeros(J, T);
  lacuna::Spectrum S = lacuna::transform(f);
  for (std::size_t k = 0; k < S.size(); ++k)
    for (const auto& L : windows)
      if (S.frequency(k) >= L.left.to_double() && S.frequency(k) < L.right.to_double()) S.coeffs[k] = cplx(g(rng), g(rng));
  return lacuna::inverse(S);
}

double rel_err(const Signal& a, const Signal& b) { return (a - b).l2_norm() / std::max(b.l2_norm(), 1e-300); }

}  // namespace

TEST(Transform, RoundTripAndUnitarity) {
  std::mt19937_64 rng(1);
  for (int J : {4, 10, 16}) {
    auto f = random_signal(rng, J, 3.0, -1.25);
    auto S = lacuna::transform(f);
    EXPECT_LT(rel_err(lacuna::inverse(S), f), 1e-12);
    EXPECT_NEAR(S.l2_norm() / f.l2_norm(), 1.0, 1e-12);
  }
}

TEST(Transform, UnitarityLargeGrid) {
  std::mt19937_64 rng(2);
  auto f = random_signal(rng, 22, 8.0);
  EXPECT_NEAR(lacuna::transform(f).l2_norm() / f.l2_norm(), 1.0, 1e-12);
}

TEST(Transform, ToneCoefficientIsPeriod) {
  const double T = 4.0;
  auto f = tone(8, T, -2.0, 3.0 / T);
  auto S = lacuna::transform(f);
  EXPECT_NEAR(std::abs(S.coeffs[S.bin(3)] - cplx(T)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(S.coeffs[S.bin(4)]), 0.0, 1e-12);
}

TEST(ProjectSharp, TonesInsideAndOutside) {
  const double T = 1.0;
  auto L = LacInterval{d(4), d(8), 1, std::nullopt, d(0)};
  auto in = tone(6, T, 0.0, 5.0);
  EXPECT_LT(rel_err(lacuna::project_sharp(in, L), in), 1e-13);
  auto edge = tone(6, T, 0.0, 4.0);
  EXPECT_LT(rel_err(lacuna::project_sharp(edge, L), edge), 1e-13);
  auto out = tone(6, T, 0.0, 8.0);
  EXPECT_LT(lacuna::project_sharp(out, L).l2_norm(), 1e-13);
}

TEST(ProjectSharp, IdempotentAndOrthogonal) {
  std::mt19937_64 rng(3);
  auto f = random_signal(rng, 10, 2.0);
  auto fam = lacuna::lambda_tau(2, d(1, -1), d(1, 8));
  for (std::size_t i = 0; i + 1 < fam.size(); i += 7) {
    auto P = lacuna::project_sharp(f, fam[i]);
    EXPECT_LT(rel_err(lacuna::project_sharp(P, fam[i]), P), 1e-13);
    EXPECT_LT(lacuna::project_sharp(P, fam[i + 1]).l2_norm(), 1e-13 * std::max(1.0, P.l2_norm()));
  }
}

TEST(ProjectSharp, ParsevalTiling) {
  std::mt19937_64 rng(4);
  for (int tau : {1, 2, 3}) {
    auto fam = lacuna::lambda_tau(tau, d(1, -2), d(1, 7));
    auto f = band_signal(rng, 12, 4.0, fam);
    double sum = 0.0;
    for (auto& L : fam) sum += std::pow(lacuna::project_sharp(f, L).l2_norm(), 2);
    EXPECT_NEAR(sum / std::pow(f.l2_norm(), 2), 1.0, 1e-10) << tau;
    auto LP = lacuna::lp_square_function(f, tau, lacuna::ProjectionMode::Sharp, d(1, -2), d(1, 7));
    EXPECT_NEAR(LP.l2_norm() / f.l2_norm(), 1.0, 1e-10);
  }
}

TEST(ProjectSmooth, CenterToneAndSupport) {
  auto L = *lacuna::find_in_lambda({d(10), d(12)}, 2);
  auto c = tone(8, 1.0, 0.0, 11.0);
  EXPECT_LT(rel_err(lacuna::project_smooth(c, L), c), 1e-13);
  auto far = tone(8, 1.0, 0.0, 13.0);  // (5/4)L = [9.5, 12.5)
  EXPECT_LT(lacuna::project_smooth(far, L).l2_norm(), 1e-13);
}

TEST(ProjectSmooth, FixesSharpProjection) {
  std::mt19937_64 rng(5);
  auto f = random_signal(rng, 12, 8.0);
  for (auto& L : lacuna::lambda_tau(2, d(1, -2), d(1, 6))) {
    auto P = lacuna::project_sharp(f, L);
    EXPECT_LT(rel_err(lacuna::project_smooth(P, L), P), 1e-10);
  }
}

TEST(ModulateProject, MatchesProjectSmooth) {
  std::mt19937_64 rng(6);
  const double T = 8.0;
  auto f = random_signal(rng, 14, T);
  const double ny = f.nyquist();
  int checked = 0;
  for (int tau : {1, 2, 3}) {
    for (auto& L : lacuna::lambda_tau(tau, d(1, -3), lacuna::band_limit(f))) {
      const double c = L.center().to_double(), h = 0.625 * L.length().to_double();
      if (c - h < -ny || c + h > ny) continue;
      auto a = lacuna::modulate_project(f, L);
      auto b = lacuna::project_smooth(f, L);
      EXPECT_LT(rel_err(a, b), 1e-9) << L;
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(ModulateProject, AnchorToneVanishes) {
  auto L = *lacuna::find_in_lambda({d(9), d(10)}, 2);
  auto f = tone(8, 1.0, 0.0, 8.0);
  EXPECT_LT(lacuna::modulate_project(f, L).l2_norm(), 1e-13);
  // Anchor 1/2 is not a multiple of 1/T for T = 1.
  auto off_lattice = *lacuna::find_in_lambda({d(5, -3), d(3, -2)}, 2);
  EXPECT_THROW(lacuna::modulate_project(f, off_lattice), lacuna::Error);
}

TEST(Aliasing, FlagRaisedOutsideBand) {
  auto f = tone(6, 1.0, 0.0, 3.0);  // nyquist 32
  lacuna::AliasingFlag flag;
  LacInterval high{d(64), d(128), 1, std::nullopt, d(0)};
  auto P = lacuna::project_sharp(f, high, &flag);
  EXPECT_TRUE(flag.aliased);
  EXPECT_EQ(P.l2_norm(), 0.0);
  lacuna::AliasingFlag clear;
  lacuna::project_sharp(f, LacInterval{d(2), d(4), 1, std::nullopt, d(0)}, &clear);
  EXPECT_FALSE(clear.aliased);
}

TEST(SquareFunction, SingleToneIsConstant) {
  auto f = tone(10, 2.0, 0.0, 5.5, cplx(0.0, 3.0));
  auto S = lacuna::lp_square_function(f, 2, lacuna::ProjectionMode::Sharp, d(1, -1));
  for (auto& v : S.samples) EXPECT_NEAR(v.real(), 3.0, 1e-12);
}

TEST(SquareFunction, DeterministicAcrossThreadCounts) {
  std::mt19937_64 rng(7);
  auto f = random_signal(rng, 12, 4.0);
  setenv("LACUNA_THREADS", "1", 1);
  auto a = lacuna::lp_square_function(f, 2, lacuna::ProjectionMode::Smooth, d(1, -2));
  setenv("LACUNA_THREADS", "4", 1);
  auto b = lacuna::lp_square_function(f, 2, lacuna::ProjectionMode::Smooth, d(1, -2));
  unsetenv("LACUNA_THREADS");
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.samples[i], b.samples[i]);
}

TEST(SquareFunction, RandomSignsKhintchine) {
  std::mt19937_64 rng(8);
  auto fam = lacuna::lambda_tau(2, d(1, -1), d(1, 6));
  auto f = band_signal(rng, 11, 4.0, fam);
  std::vector<Signal> parts;
  for (auto& L : fam) parts.push_back(lacuna::project_sharp(f, L));
  auto LP = lacuna::lp_square_function(f, 2, lacuna::ProjectionMode::Sharp, d(1, -1), d(1, 6));
  const int K = 256;
  double avg = 0.0;
  std::bernoulli_distribution coin;
  for (int k = 0; k < K; ++k) {
    Signal s = Signal::zeros(11, 4.0);
    for (auto& p : parts) s += (coin(rng) ? 1.0 : -1.0) * p;
    avg += s.l1_norm() / K;
  }
  const double r = avg / LP.l1_norm();
  const double tol = 3.0 / std::sqrt(K);
  EXPECT_GT(r, 1.0 / std::sqrt(2.0) - tol);
  EXPECT_LT(r, 1.0 + tol);
}

TEST(SmoothSymbol, DerivativeBounds) {
  for (auto& L : lacuna::lambda_tau(3, d(1, -2), d(1, 6))) {
    const double len = L.length().to_double(), c = L.center().to_double();
    for (int k = 0; k <= 4; ++k) {
      const double sup = lacuna::derivative_sup([&](double xi) { return lacuna::smooth_symbol(L, xi); },
                                                c - 0.7 * len, c + 0.7 * len, k, 4096);
      EXPECT_LE(std::pow(len, k) * sup, 1e10);
    }
  }
}

TEST(WeakL1, Examples) {
  std::vector<double> ind(100, 0.0);
  for (int i = 10; i < 40; ++i) ind[i] = 2.0;
  EXPECT_DOUBLE_EQ(lacuna::weak_l1_norm(ind, 0.01), 2.0 * 0.3);
  // 1/x on [2^-10, 1]: |{1/x > a}| = 1/a - 2^-10 for a in [1, 2^10], so the norm tends to 1.
  const int n = 1 << 16;
  std::vector<double> inv(n);
  const double a = std::ldexp(1.0, -10), h = (1.0 - a) / n;
  for (int i = 0; i < n; ++i) inv[i] = 1.0 / (a + (i + 0.5) * h);
  EXPECT_NEAR(lacuna::weak_l1_norm(inv, h), 1.0, 2e-2);
  std::vector<double> bigger(inv);
  for (auto& x : bigger) x *= 1.5;
  EXPECT_GE(lacuna::weak_l1_norm(bigger, h), lacuna::weak_l1_norm(inv, h));
}

TEST(BinaryIO, RoundTrip) {
  std::mt19937_64 rng(9);
  auto f = random_signal(rng, 7, 2.5);
  std::stringstream ss;
  lacuna::write_signal(ss, f);
  EXPECT_EQ(ss.str().size(), 16u + 16u * 128u);
  auto g = lacuna::read_signal(ss);
  EXPECT_EQ(g.samples, f.samples);
  EXPECT_EQ(g.period, 2.5);
  std::stringstream bad("XXXX");
  EXPECT_THROW(lacuna::read_signal(bad), lacuna::Error);
}
