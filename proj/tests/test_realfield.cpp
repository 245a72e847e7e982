#include <gtest/gtest.h>

#include "bohrgap/realfield.hpp"
#include "bohrgap/thresholds.hpp"
#include "bohrgap/torus.hpp"

using namespace bohrgap;

TEST(FixedReal, DecimalDyadicIsExact) {
  FixedReal h = FixedReal::from_decimal("0.5", 128);
  EXPECT_EQ(h.mantissa(), detail::pow2(127));
  EXPECT_EQ(h.err(), 0);
  FixedReal one = FixedReal::from_decimal("1", 64);
  EXPECT_EQ(one.mantissa(), detail::pow2(64));
  EXPECT_EQ(one.err(), 0);
}

TEST(FixedReal, DecimalRoundsWithinOneUlp) {
  FixedReal t = FixedReal::from_decimal("0.1", 128);
  EXPECT_LE(t.err(), 1);
  mpq_class gap = mpq_class(t.mantissa(), detail::pow2(128)) - mpq_class(1, 10);
  EXPECT_LE(abs(gap), mpq_class(1, detail::pow2(128)));
}

TEST(FixedReal, MalformedDecimalRejected) {
  EXPECT_THROW(FixedReal::from_decimal("0.1.2"), ValidationError);
  EXPECT_THROW(FixedReal::from_decimal(""), ValidationError);
  EXPECT_THROW(FixedReal::from_decimal("abc"), ValidationError);
  EXPECT_THROW(FixedReal::from_decimal("1e"), ValidationError);
}

TEST(FixedReal, ScaleFloor) { EXPECT_THROW(FixedReal(1, 32), ValidationError); }

TEST(FixedReal, SqrtInt) {
  FixedReal two = FixedReal::sqrt_int(4, 128);
  EXPECT_EQ(two.mantissa(), 2 * detail::pow2(128));
  EXPECT_EQ(two.err(), 0);
  EXPECT_EQ(FixedReal::sqrt_int(1, 64).mantissa(), detail::pow2(64));
  FixedReal r2 = FixedReal::sqrt_int(2, 128);
  mpq_class v(r2.mantissa(), detail::pow2(128));
  EXPECT_LE(abs(mpq_class(v * v - 2)), mpq_class(3, detail::pow2(128)));
}

TEST(FixedReal, DistNearestInt) {
  EXPECT_EQ(*dist_nearest_int(FixedReal::from_decimal("0.5")).exact(), mpq_class(1, 2));
  EXPECT_EQ(*dist_nearest_int(FixedReal::from_decimal("3.25")).exact(), mpq_class(1, 4));
  EXPECT_EQ(*dist_nearest_int(FixedReal::from_decimal("-0.3")).exact(), mpq_class(3, 10));
  FixedReal d = dist_nearest_int(FixedReal::from_decimal("-0.3"));
  EXPECT_LE(abs(mpq_class(mpq_class(d.mantissa(), detail::pow2(128)) - mpq_class(3, 10))),
            mpq_class(1, detail::pow2(128)));
}

TEST(FixedReal, DistAmbiguousNearHalfReported) {
  FixedReal x(detail::pow2(127), 128, 5);
  EXPECT_THROW(dist_nearest_int(x), PrecisionExhausted);
}

TEST(FixedReal, DistProperties) {
  FixedReal r2 = FixedReal::sqrt_int(2);
  for (long n = -50; n <= 50; ++n) {
    FixedReal x = mpz_class(n) * r2;
    FixedReal d = dist_nearest_int(x);
    EXPECT_GE(d.mantissa(), 0);
    EXPECT_LE(d.mantissa(), detail::pow2(127));
    EXPECT_EQ(dist_nearest_int(-x).mantissa(), d.mantissa());
    EXPECT_EQ(dist_nearest_int(x + FixedReal::from_int(7)).mantissa(), d.mantissa());
  }
}

TEST(FixedReal, NormForm) {
  FixedReal half = FixedReal::from_rational(mpq_class(1, 2));
  EXPECT_EQ(*norm_form(3, half, FixedReal::from_int(0)).exact(), mpq_class(1, 2));
  FixedReal third = FixedReal::from_rational(mpq_class(1, 3));
  EXPECT_EQ(*norm_form(7, third, half).exact(), mpq_class(1, 6));
  // ||12 sqrt 2|| = 17 - 12 sqrt 2, pinned by the mpmath oracle.
  FixedReal d = norm_form(12, FixedReal::sqrt_int(2), FixedReal::from_int(0));
  EXPECT_EQ(d.to_decimal(10), "0.0294372515");
}

TEST(FixedReal, NormFormPeriodicOnDyadics) {
  FixedReal a = FixedReal::from_decimal("0.3125");  // 5/16
  FixedReal g = FixedReal::from_decimal("0.125");
  for (long n = 0; n < 16; ++n)
    for (long m : {16L, 32L, -48L})
      EXPECT_EQ(norm_form(n + m, a, g).mantissa(), norm_form(n, a, g).mantissa());
}

TEST(FixedReal, ErrorAccountingSound) {
  FixedReal lo = FixedReal::sqrt_int(3, 128), hi = FixedReal::sqrt_int(3, 192);
  for (long n : {1L, 999L, -123457L, 1000000L}) {
    FixedReal x = norm_form(n, lo, FixedReal::from_int(0, 128));
    FixedReal y = norm_form(n, hi, FixedReal::from_int(0, 192));
    mpz_class up = x.mantissa() << 64;
    mpz_class slack = (x.err() << 64) + y.err() + 1;
    EXPECT_LE(abs(mpz_class(up - y.mantissa())), slack) << n;
  }
}

TEST(FixedReal, CompareFailsRatherThanGuesses) {
  FixedReal a(100, 64, 3), b(102, 64, 3);
  EXPECT_THROW(compare(a, b), PrecisionExhausted);
  FixedReal c(110, 64, 3);
  EXPECT_TRUE(certified_lt(a, c));
  EXPECT_EQ(compare(FixedReal::from_rational(mpq_class(1, 3)), FixedReal::from_rational(mpq_class(2, 6))),
            std::strong_ordering::equal);
}

TEST(FixedReal, ArithmeticEnclosures) {
  FixedReal a = FixedReal::sqrt_int(2), b = FixedReal::sqrt_int(3);
  FixedReal p = a * b, q = a / b;
  mpq_class six_lo = p.lower() * p.lower(), six_hi = p.upper() * p.upper();
  EXPECT_LE(six_lo, 6);
  EXPECT_GE(six_hi, 6);
  mpq_class r_lo = q.lower() * q.lower() * 3, r_hi = q.upper() * q.upper() * 3;
  EXPECT_LE(r_lo, 2);
  EXPECT_GE(r_hi, 2);
}

TEST(FixedReal, KthRoot) {
  FixedReal r = FixedReal::kth_root(mpq_class(2000), 3);
  mpq_class lo = r.lower(), hi = r.upper();
  EXPECT_LE(lo * lo * lo, 2000);
  EXPECT_GE(hi * hi * hi, 2000);
  EXPECT_EQ(FixedReal::kth_root(mpq_class(27, 8), 3).err(), 0);
}

TEST(Thresholds, PowerComparisons) {
  Exponent half = Exponent::rational(mpq_class(1, 2));
  EXPECT_EQ(compare_with_power(mpq_class(10), mpq_class(100), half), 0);
  EXPECT_EQ(compare_with_power(mpq_class(11), mpq_class(100), half), 1);
  Exponent se = Exponent::sqrt_of(mpq_class(1, 20));
  EXPECT_EQ(ceil_power(mpq_class(100000), se), 14);  // 10^(5 sqrt(0.05)) = 13.1...
  EXPECT_EQ(ceil_power(mpq_class(100), Exponent::sqrt_of(mpq_class(1, 25))), 3);
  EXPECT_EQ(floor_power(mpq_class(100), Exponent::sqrt_of(mpq_class(1, 4))), 10);
  EXPECT_EQ(compare_with_power(mpq_class(1, 6), mpq_class(36), Exponent::rational(mpq_class(-1, 2))), 0);
}

TEST(Torus, PhaseMatchesExact) {
  FixedReal a = FixedReal::sqrt_int(2), g = FixedReal::from_decimal("0.3");
  TorusForm f(a, g);
  for (std::int64_t n : {0L, 1L, -7L, 12L, 123456789L}) {
    auto [lo, hi] = f.dist_enclosure(n);
    FixedReal d = norm_form(n, a, g);
    EXPECT_LE(lo, d.upper());
    EXPECT_GE(hi, d.lower());
  }
}

TEST(Torus, ParseReal) {
  EXPECT_EQ(*parse_real("rat:1/3").exact(), mpq_class(1, 3));
  EXPECT_EQ(parse_real("sqrt:2").mantissa(), FixedReal::sqrt_int(2).mantissa());
  EXPECT_EQ(*parse_real("dec:0.25").exact(), mpq_class(1, 4));
  EXPECT_EQ(*parse_real("0.75").exact(), mpq_class(3, 4));
  EXPECT_THROW(parse_real("rat:1/0"), ValidationError);
  EXPECT_THROW(parse_real("sqrt:x"), ValidationError);
}
