#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lacuna/czd.hpp"

using lacuna::cplx;
using lacuna::DyadicScalar;
using lacuna::Interval;
using lacuna::Signal;

namespace {

Interval iv(double a, double b) { return {DyadicScalar::from_double(a), DyadicScalar::from_double(b)}; }

lacuna::CzConfig no_margin() {
  lacuna::CzConfig c;
  c.enforce_margin = false;
  return c;
}

// Bumps and integrable spikes inside [-1/2, 1/2), on a window of length 16.
Signal random_rough(std::mt19937_64& rng, int J) {
  std::uniform_real_distribution<double> U(-0.4, 0.4);
  std::uniform_real_distribution<double> W(0.01, 0.1);
  std::normal_distribution<double> G;
  std::vector<double> c, w, amp, spike;
  for (int i = 0; i < 3; ++i) {
    c.push_back(U(rng));
    w.push_back(W(rng));
    amp.push_back(G(rng));
  }
  for (int i = 0; i < 2; ++i) spike.push_back(U(rng));
  return Signal::sample(J, 16.0, -8.0, [&](double x) -> cplx {
    if (x < -0.5 || x >= 0.5) return 0.0;
    double v = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) v += amp[i] * std::exp(-std::pow((x - c[i]) / w[i], 2));
    for (double s : spike) v += 0.2 / std::sqrt(std::abs(x - s) + 1e-4);
    return cplx(v, 0.3 * v * std::sin(9 * x));
  });
}

}  // namespace

TEST(Stopping, IndicatorOfUnitInterval) {
  // On [0, 2) the top interval has average 1/2, not above alpha = 1/2.
  auto f = Signal::sample(8, 2.0, 0.0, [](double x) -> cplx { return x < 1.0 ? 1.0 : 0.0; });
  auto J = lacuna::stopping_intervals(f, 0, 0.5);
  ASSERT_EQ(J.size(), 1u);
  EXPECT_EQ(J[0], iv(0, 1));
  EXPECT_TRUE(lacuna::stopping_intervals(f, 0, 1.0).empty());
  EXPECT_THROW(lacuna::stopping_intervals(f, 0, 0.25), lacuna::Error);
}

TEST(Stopping, MaximalDisjointAndSandwiched) {
  std::mt19937_64 rng(1);
  for (int sigma : {0, 1, 2}) {
    auto f = random_rough(rng, 14);
    const double alpha = 2.0;
    auto J = lacuna::stopping_intervals(f, sigma, alpha);
    ASSERT_FALSE(J.empty());
    const auto a = f.magnitudes();
    const double dx = f.dx();
    auto avg = [&](const Interval& I) {
      const auto s = static_cast<std::size_t>((I.left.to_double() - f.offset) / dx);
      const auto n = static_cast<std::size_t>(I.length().to_double() / dx);
      return lacuna::luxemburg_avg(std::span<const double>(a).subspan(s, n), 0.5 * sigma);
    };
    for (std::size_t i = 0; i < J.size(); ++i) {
      EXPECT_TRUE(J[i].is_dyadic());
      if (i > 0) {
        EXPECT_LE(J[i - 1].right, J[i].left);
      }
      const double v = avg(J[i]);
      EXPECT_GT(v, alpha);
      EXPECT_LE(v, 2 * alpha * (1 + 1e-12));
      // Maximality: the dyadic parent does not exceed alpha.
      const auto len = J[i].length();
      const auto pl = J[i].left.is_multiple_of_pow2(len.exponent() + 1) ? J[i].left : J[i].left - len;
      EXPECT_LE(avg(Interval{pl, pl + len.doubled()}), alpha * (1 + 1e-12));
    }
  }
}

TEST(LacunaryBins, SigmaZeroAndOne) {
  EXPECT_EQ(lacuna::lacunary_bins(0, DyadicScalar(1, 0), DyadicScalar(8, 0)), std::vector<std::int64_t>{0});
  // |J| = 1, lambda = +-1, +-2, +-4, +-8.
  std::vector<std::int64_t> want{-8, -4, -2, -1, 0, 1, 2, 4, 8};
  EXPECT_EQ(lacuna::lacunary_bins(1, DyadicScalar(1, 0), DyadicScalar(8, 0)), want);
  // |J| = 1/4 rescales by 4 but the bin integers stay the same shape.
  want = {-2, -1, 0, 1, 2};
  EXPECT_EQ(lacuna::lacunary_bins(1, DyadicScalar(1, -2), DyadicScalar(8, 0)), want);
}

TEST(RemoveLacunary, SigmaZeroRemovesMean) {
  std::vector<cplx> v{1.0, 3.0, -2.0, 6.0};
  auto r = lacuna::remove_lacunary(v, 0.0, 0.25, {0});
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(std::abs(r.b_lac[i] - cplx(2.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(r.b[i] - (v[i] - 2.0)), 0.0, 1e-14);
  }
  EXPECT_LE(r.diag.max_residual, 1e-15);
}

TEST(RemoveLacunary, WindowedExponentialIsRemovedEntirely) {
  // On J = [3, 4) with 64 cells, e^{2 pi i 4 y} is one lac_1 frequency: b_J vanishes.
  std::vector<cplx> v(64);
  for (std::size_t j = 0; j < 64; ++j) v[j] = std::polar(1.0, 2 * std::numbers::pi * 4.0 * (3.0 + j / 64.0));
  const auto bins = lacuna::lacunary_bins(1, DyadicScalar(1, 0), DyadicScalar(32, 0));
  auto r = lacuna::remove_lacunary(v, 3.0, 1.0 / 64, bins);
  for (std::size_t j = 0; j < 64; ++j) EXPECT_LE(std::abs(r.b[j]), 1e-13);
  // A non-lacunary frequency (3) survives untouched.
  for (std::size_t j = 0; j < 64; ++j) v[j] = std::polar(1.0, 2 * std::numbers::pi * 3.0 * (3.0 + j / 64.0));
  r = lacuna::remove_lacunary(v, 3.0, 1.0 / 64, bins);
  for (std::size_t j = 0; j < 64; ++j) EXPECT_LE(std::abs(r.b[j] - v[j]), 1e-13);
  EXPECT_LE(r.diag.nudft_residual, 1e-12);
}

TEST(RemoveLacunary, DirectSummationAgreesWithBins) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> G;
  std::vector<cplx> v(256);
  for (auto& x : v) x = cplx(G(rng), G(rng));
  const auto bins = lacuna::lacunary_bins(2, DyadicScalar(1, -1), DyadicScalar(256, 0));
  auto r = lacuna::remove_lacunary(v, -0.5, 1.0 / 512, bins);
  EXPECT_GT(r.diag.frequencies, 20u);
  EXPECT_LE(r.diag.max_residual, 1e-13);
  EXPECT_LE(r.diag.nudft_residual, 1e-11);
}

TEST(CzDecompose, IndicatorSingleAtom) {
  auto f = Signal::sample(8, 2.0, 0.0, [](double x) -> cplx { return x < 1.0 ? 1.0 : 0.0; });
  auto d = lacuna::cz_decompose(f, 0, 0.5, no_margin());
  ASSERT_EQ(d.atoms.size(), 1u);
  cplx mean{};
  for (const auto& v : d.atoms[0].b) mean += v;
  EXPECT_LE(std::abs(mean), 1e-12);
  EXPECT_EQ(d.g.sup_norm(), 0.0);
  EXPECT_LE(d.summary.reconstruction_error, 1e-15);
  EXPECT_DOUBLE_EQ(d.summary.measure_sum, 1.0);
  EXPECT_DOUBLE_EQ(d.summary.orlicz_mass, 2.0);
  EXPECT_THROW(lacuna::cz_decompose(f, 0, 0.5), lacuna::Error);  // no support margin
}

TEST(CzDecompose, AlphaAboveEverything) {
  std::mt19937_64 rng(3);
  auto f = random_rough(rng, 12);
  auto d = lacuna::cz_decompose(f, 1, 1e6);
  EXPECT_TRUE(d.atoms.empty());
  EXPECT_EQ(d.g.samples, f.samples);
  EXPECT_EQ(d.b_lac.sup_norm(), 0.0);
}

TEST(CzDecompose, PropertiesOnRandomData) {
  std::mt19937_64 rng(4);
  for (int sigma : {0, 1, 2}) {
    for (int rep = 0; rep < 4; ++rep) {
      auto f = random_rough(rng, 14);
      auto d = lacuna::cz_decompose(f, sigma, 1.5);
      const auto& s = d.summary;
      EXPECT_TRUE(s.margin_ok);
      EXPECT_LE(s.reconstruction_error, 1e-12);
      EXPECT_LE(s.measure_sum, s.orlicz_mass);
      EXPECT_EQ(s.sandwich_failures, 0u);
      EXPECT_LE(s.max_lac_residual, 1e-9);
      EXPECT_LE(s.g_sup_constant, 1.0);
      EXPECT_LE(s.g_l1_constant, 1.0 + 1e-12);
      EXPECT_GT(s.max_atom_constant, 0.0);
      EXPECT_TRUE(std::isfinite(s.blac_mass_constant));
    }
  }
}
