#pragma once

// Certified comparisons between rationals and real powers base^e, where the
// exponent e is a rational or the square root of one (eps and sqrt(eps)).
// Rational exponents compare exactly through integer powers; square-root
// exponents go through MPFR with outward rounding.

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <optional>
#include <string>

#include "bohrgap/errors.hpp"
#include "bohrgap/realfield.hpp"

namespace bohrgap {

// A real exponent: sign * value where value = radicand or sqrt(radicand).
class Exponent {
 public:
  static Exponent rational(const mpq_class& q) { return Exponent(q, false); }
  static Exponent sqrt_of(const mpq_class& radicand) {
    if (radicand < 0) throw ValidationError("sqrt of a negative exponent");
    mpq_class r(radicand);
    r.canonicalize();
    if (detail::is_perfect_square(r.get_num()) && detail::is_perfect_square(r.get_den())) {
      mpz_class a, b;
      mpz_sqrt(a.get_mpz_t(), r.get_num().get_mpz_t());
      mpz_sqrt(b.get_mpz_t(), r.get_den().get_mpz_t());
      return Exponent(mpq_class(a, b), false);
    }
    return Exponent(r, true);
  }

  Exponent negated() const {
    Exponent e = *this;
    e.negative_ = !negative_;
    return e;
  }

  bool is_rational() const { return !is_sqrt_; }
  // Rational value (only when is_rational()).
  mpq_class rational_value() const {
    mpq_class v = base_;
    if (negative_) v = -v;
    return v;
  }
  long double approx() const {
    long double v = is_sqrt_ ? sqrtl(mpq_to_ld(base_)) : mpq_to_ld(base_);
    return negative_ ? -v : v;
  }

  // Interval [lo, hi] of base^e, base > 0, via MPFR at `prec` bits.
  void power_interval(const mpq_class& base, mpfr_prec_t prec, mpfr_t lo, mpfr_t hi) const {
    mpfr_t b_lo, b_hi, e_lo, e_hi, t;
    mpfr_inits2(prec, b_lo, b_hi, e_lo, e_hi, t, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_q(b_lo, base.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(b_hi, base.get_mpq_t(), MPFR_RNDU);
    mpfr_set_q(e_lo, base_.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(e_hi, base_.get_mpq_t(), MPFR_RNDU);
    if (is_sqrt_) {
      mpfr_sqrt(e_lo, e_lo, MPFR_RNDD);
      mpfr_sqrt(e_hi, e_hi, MPFR_RNDU);
    }
    if (negative_) {
      mpfr_neg(t, e_lo, MPFR_RNDN);
      mpfr_neg(e_lo, e_hi, MPFR_RNDN);
      mpfr_set(e_hi, t, MPFR_RNDN);
    }
    // base^e is monotone in each argument on the relevant orthant; take the
    // extreme corners of the box.
    mpfr_t c[4];
    for (auto& ci : c) mpfr_init2(ci, prec);
    mpfr_pow(c[0], b_lo, e_lo, MPFR_RNDD);
    mpfr_pow(c[1], b_lo, e_hi, MPFR_RNDD);
    mpfr_pow(c[2], b_hi, e_lo, MPFR_RNDD);
    mpfr_pow(c[3], b_hi, e_hi, MPFR_RNDD);
    mpfr_set(lo, c[0], MPFR_RNDD);
    for (int i = 1; i < 4; ++i) mpfr_min(lo, lo, c[i], MPFR_RNDD);
    mpfr_pow(c[0], b_lo, e_lo, MPFR_RNDU);
    mpfr_pow(c[1], b_lo, e_hi, MPFR_RNDU);
    mpfr_pow(c[2], b_hi, e_lo, MPFR_RNDU);
    mpfr_pow(c[3], b_hi, e_hi, MPFR_RNDU);
    mpfr_set(hi, c[0], MPFR_RNDU);
    for (int i = 1; i < 4; ++i) mpfr_max(hi, hi, c[i], MPFR_RNDU);
    for (auto& ci : c) mpfr_clear(ci);
    mpfr_clears(b_lo, b_hi, e_lo, e_hi, t, static_cast<mpfr_ptr>(nullptr));
  }

  static long double mpq_to_ld(const mpq_class& q) {
    return FixedReal::mpz_to_ld(q.get_num() * detail::pow2(128) / q.get_den(), 128);
  }

 private:
  Exponent(mpq_class base, bool is_sqrt) : base_(std::move(base)), is_sqrt_(is_sqrt) {
    if (base_ < 0) {
      base_ = -base_;
      negative_ = true;
    }
  }
  mpq_class base_;
  bool is_sqrt_ = false;
  bool negative_ = false;
};

namespace detail {

// sign(x - base^(u/v)) for x > 0, base > 0, v > 0: sign(x^v - base^u).
inline int cmp_rational_power(const mpq_class& x, const mpq_class& base, const mpq_class& expo) {
  mpz_class u = expo.get_num(), v = expo.get_den();
  mpz_class au = abs(u);
  if (v > 4096 || au > 4096)
    throw GuardViolation("rational exponent too large for exact power comparison");
  unsigned long vv = v.get_ui(), uu = au.get_ui();
  mpq_class lhs, rhs;
  mpz_class t1, t2;
  auto qpow = [](const mpq_class& q, unsigned long e) {
    mpz_class n, d;
    mpz_pow_ui(n.get_mpz_t(), q.get_num().get_mpz_t(), e);
    mpz_pow_ui(d.get_mpz_t(), q.get_den().get_mpz_t(), e);
    return mpq_class(n, d);
  };
  lhs = qpow(x, vv);
  rhs = qpow(base, uu);
  if (u < 0) {  // x^v vs base^-|u|  <=>  x^v * base^|u| vs 1
    lhs *= rhs;
    rhs = 1;
  }
  return cmp(lhs, rhs);
}

}  // namespace detail

// Certified sign of (x - base^e) where x is known to lie in [lo, hi].
// Throws PrecisionExhausted when the enclosure straddles the power.
inline int compare_with_power(const mpq_class& lo, const mpq_class& hi, const mpq_class& base, const Exponent& e) {
  if (base <= 0) throw ValidationError("power base must be positive");
  if (base == 1) {
    if (lo > 1) return 1;
    if (hi < 1) return -1;
    if (lo == 1 && hi == 1) return 0;
    throw PrecisionExhausted("comparison with 1 undecided");
  }
  if (e.is_rational()) {
    mpq_class ev = e.rational_value();
    auto sgn = [&](const mpq_class& x) { return x <= 0 ? -1 : detail::cmp_rational_power(x, base, ev); };
    int s_lo = sgn(lo), s_hi = sgn(hi);
    if (s_lo > 0) return 1;
    if (s_hi < 0) return -1;
    if (lo == hi) return s_lo;
    throw PrecisionExhausted("value enclosure straddles the power threshold");
  }
  for (mpfr_prec_t prec : {256, 1024}) {
    mpfr_t plo, phi, xlo, xhi;
    mpfr_inits2(prec, plo, phi, xlo, xhi, static_cast<mpfr_ptr>(nullptr));
    e.power_interval(base, prec, plo, phi);
    mpfr_set_q(xlo, lo.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(xhi, hi.get_mpq_t(), MPFR_RNDU);
    int r = 2;
    if (mpfr_greater_p(xlo, phi)) r = 1;
    else if (mpfr_less_p(xhi, plo)) r = -1;
    mpfr_clears(plo, phi, xlo, xhi, static_cast<mpfr_ptr>(nullptr));
    if (r != 2) return r;
  }
  throw PrecisionExhausted("value enclosure straddles an irrational power threshold");
}

inline int compare_with_power(const mpq_class& x, const mpq_class& base, const Exponent& e) {
  return compare_with_power(x, x, base, e);
}

inline int compare_with_power(const FixedReal& x, const mpq_class& base, const Exponent& e) {
  if (x.exact()) return compare_with_power(*x.exact(), base, e);
  return compare_with_power(x.lower(), x.upper(), base, e);
}

// Smallest integer n >= base^e (base^e > 0).
inline mpz_class ceil_power(const mpq_class& base, const Exponent& e) {
  long double approx = powl(Exponent::mpq_to_ld(base), e.approx());
  mpz_class n(static_cast<double>(std::floor(approx)));
  if (n < 0) n = 0;
  // Walk to the exact boundary; the approximation is within a few units.
  while (n > 0 && compare_with_power(mpq_class(n - 1), base, e) >= 0) --n;
  while (compare_with_power(mpq_class(n), base, e) < 0) ++n;
  return n;
}

// Largest integer n <= base^e.
inline mpz_class floor_power(const mpq_class& base, const Exponent& e) {
  mpz_class c = ceil_power(base, e);
  if (compare_with_power(mpq_class(c), base, e) == 0) return c;
  return c - 1;
}

}  // namespace bohrgap
