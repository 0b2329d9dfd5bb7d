#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lacuna/dyadic.hpp"

using lacuna::DyadicScalar;
using lacuna::Interval;

TEST(DyadicScalar, CanonicalForm) {
  DyadicScalar a(12, 0);
  EXPECT_EQ(a.mantissa(), 3);
  EXPECT_EQ(a.exponent(), 2);
  DyadicScalar z(0, 17);
  EXPECT_EQ(z.mantissa(), 0);
  EXPECT_EQ(z.exponent(), 0);
  EXPECT_EQ(DyadicScalar(-8), DyadicScalar(-1, 3));
  EXPECT_EQ(DyadicScalar(6, -3), DyadicScalar(3, -2));
}

TEST(DyadicScalar, ExactArithmeticAgainstRationals) {
  // Oracle: values k / 2^10 held as plain integers k.
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> dist(-(1 << 20), 1 << 20);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t p = dist(rng), q = dist(rng);
    const DyadicScalar a(p, -10), b(q, -10);
    EXPECT_EQ(a + b, DyadicScalar(p + q, -10));
    EXPECT_EQ(a - b, DyadicScalar(p - q, -10));
    EXPECT_EQ(a * b, DyadicScalar(p * q, -20));
    EXPECT_EQ(a < b, p < q);
    EXPECT_EQ(a == b, p == q);
    EXPECT_EQ(a.doubled(), DyadicScalar(2 * p, -10));
    EXPECT_EQ(a.halved().doubled(), a);
    EXPECT_EQ(-(-a), a);
  }
}

TEST(DyadicScalar, ComparisonAcrossDistantExponents) {
  EXPECT_LT(DyadicScalar::pow2(-60), DyadicScalar::pow2(60));
  EXPECT_LT(DyadicScalar(-1, 60), DyadicScalar(-1, -60));
  EXPECT_GT(DyadicScalar(3, -1), DyadicScalar(1, 0));
  EXPECT_LT(DyadicScalar(5, -2), DyadicScalar(3, -1));
}

TEST(DyadicScalar, OverflowThrows) {
  EXPECT_THROW(DyadicScalar::pow2(40) + DyadicScalar::pow2(-40), lacuna::Error);
  const DyadicScalar big((std::int64_t{1} << 62) + 1, 0);
  EXPECT_THROW(big * big, lacuna::Error);
}

TEST(DyadicScalar, ParseAndPrint) {
  EXPECT_EQ(DyadicScalar::parse("5/4"), DyadicScalar(5, -2));
  EXPECT_EQ(DyadicScalar::parse("2^-3"), DyadicScalar::pow2(-3));
  EXPECT_EQ(DyadicScalar::parse("-12"), DyadicScalar(-3, 2));
  EXPECT_EQ(DyadicScalar::parse("3*2^-5"), DyadicScalar(3, -5));
  EXPECT_THROW(DyadicScalar::parse("1/3"), lacuna::Error);
  EXPECT_THROW(DyadicScalar::parse("abc"), lacuna::Error);
  EXPECT_EQ(DyadicScalar(5, -2).to_string(), "5/4");
  EXPECT_EQ(DyadicScalar(-12).to_string(), "-12");
  EXPECT_DOUBLE_EQ(DyadicScalar(5, -2).to_double(), 1.25);
}

TEST(Interval, DyadicnessAndDistances) {
  const Interval I{DyadicScalar(8), DyadicScalar(16)};
  EXPECT_TRUE(I.is_dyadic());
  EXPECT_FALSE((Interval{DyadicScalar(4), DyadicScalar(12)}).is_dyadic());
  const Interval L{DyadicScalar(10), DyadicScalar(12)};
  EXPECT_EQ(lacuna::distance_to_complement(L, I), DyadicScalar(2));
  EXPECT_EQ(lacuna::distance(L, DyadicScalar(16)), DyadicScalar(4));
  EXPECT_TRUE(I.contains(DyadicScalar(8)));
  EXPECT_FALSE(I.contains(DyadicScalar(16)));
}
