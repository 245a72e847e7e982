#pragma once

// Fixed-point reals with additive error accounting.
//
// A FixedReal stands for the interval
//
//     [ (mantissa - err) * 2^-scale , (mantissa + err) * 2^-scale ]
//
// around the intended real. Integer-linear operations are exact on the
// mantissa and only move err; comparisons either decide with a certified
// margin or throw PrecisionExhausted. Values that are known rationals keep
// that rational alongside, so ties between rational inputs are settled
// exactly instead of failing.

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "bohrgap/errors.hpp"

namespace bohrgap {

inline constexpr unsigned kMinScale = 64;
inline constexpr unsigned kDefaultScale = 128;

namespace detail {

inline mpz_class pow2(unsigned bits) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, bits);
  return r;
}

inline mpz_class pow10(unsigned digits) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, digits);
  return r;
}

// floor(a / b) for b > 0.
inline mpz_class fdiv(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

// ceil(a / b) for b > 0.
inline mpz_class cdiv(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

// Nearest integer to a / b (b > 0), halves rounded up.
inline mpz_class rdiv(const mpz_class& a, const mpz_class& b) {
  return fdiv(2 * a + b, 2 * b);
}

inline mpq_class floor_q(const mpq_class& q) {
  return mpq_class(fdiv(q.get_num(), q.get_den()));
}

// Distance from q to the nearest integer, exactly.
inline mpq_class dist_nearest_q(const mpq_class& q) {
  mpq_class f = q - floor_q(q);
  mpq_class g = 1 - f;
  return f < g ? f : g;
}

inline bool is_perfect_square(const mpz_class& z) {
  return z >= 0 && mpz_perfect_square_p(z.get_mpz_t()) != 0;
}

}  // namespace detail

class FixedReal {
 public:
  FixedReal() : mantissa_(0), scale_(kDefaultScale), err_(0), exact_(mpq_class(0)) {}

  FixedReal(mpz_class mantissa, unsigned scale, mpz_class err = 0,
            std::optional<mpq_class> exact = std::nullopt)
      : mantissa_(std::move(mantissa)), scale_(scale), err_(std::move(err)), exact_(std::move(exact)) {
    if (scale_ < kMinScale) throw ValidationError("FixedReal scale must be at least 64 bits");
    if (err_ < 0) throw ValidationError("FixedReal err must be non-negative");
    if (exact_) exact_->canonicalize();
  }

  static FixedReal from_int(const mpz_class& n, unsigned scale = kDefaultScale) {
    return FixedReal(n * detail::pow2(scale), scale, 0, mpq_class(n));
  }

  // Nearest fixed-point value; err is 0 for dyadic rationals representable
  // at the scale and 1 ulp otherwise.
  static FixedReal from_rational(const mpq_class& q, unsigned scale = kDefaultScale) {
    mpq_class c(q);
    c.canonicalize();
    mpz_class num = c.get_num() * detail::pow2(scale);
    mpz_class m = detail::rdiv(num, c.get_den());
    mpz_class err = (m * c.get_den() == num) ? 0 : 1;
    return FixedReal(std::move(m), scale, std::move(err), c);
  }

  static FixedReal from_decimal(std::string_view text, unsigned scale = kDefaultScale) {
    return from_rational(parse_decimal(text), scale);
  }

  // Square root of a positive integer: floor(sqrt(m * 4^scale)).
  static FixedReal sqrt_int(unsigned long m, unsigned scale = kDefaultScale) {
    if (m == 0) throw ValidationError("sqrt_int requires m >= 1");
    mpz_class radicand = mpz_class(m) * detail::pow2(2 * scale);
    mpz_class root;
    mpz_sqrt(root.get_mpz_t(), radicand.get_mpz_t());
    if (root * root == radicand) {
      mpz_class r;
      mpz_sqrt(r.get_mpz_t(), mpz_class(m).get_mpz_t());
      return FixedReal(std::move(root), scale, 0, mpq_class(r));
    }
    return FixedReal(std::move(root), scale, 1);
  }

  // Positive real k-th root of a positive rational.
  static FixedReal kth_root(const mpq_class& x, unsigned k, unsigned scale = kDefaultScale) {
    if (x <= 0 || k == 0) throw ValidationError("kth_root requires x > 0 and k >= 1");
    mpz_class num = x.get_num() * detail::pow2(k * scale);
    mpz_class q = detail::fdiv(num, x.get_den());
    mpz_class root;
    mpz_root(root.get_mpz_t(), q.get_mpz_t(), k);
    mpz_class check;
    mpz_pow_ui(check.get_mpz_t(), root.get_mpz_t(), k);
    bool exact = (check * x.get_den() == num);
    // The floor of the quotient and the floor of the root each lose < 1 ulp.
    return FixedReal(std::move(root), scale, exact ? 0 : 2);
  }

  // Parses [+-]digits[.digits][e[+-]digits] into an exact rational.
  static mpq_class parse_decimal(std::string_view text) {
    std::size_t i = 0;
    auto fail = [&] { return ValidationError("malformed decimal: '" + std::string(text) + "'"); };
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
    std::string digits;
    int frac_digits = 0;
    bool seen_digit = false, seen_point = false;
    for (; i < text.size(); ++i) {
      char c = text[i];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits.push_back(c);
        seen_digit = true;
        if (seen_point) ++frac_digits;
      } else if (c == '.' && !seen_point) {
        seen_point = true;
      } else {
        break;
      }
    }
    if (!seen_digit) throw fail();
    long exponent = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
      ++i;
      bool eneg = false;
      if (i < text.size() && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
      if (i >= text.size()) throw fail();
      long e = 0;
      for (; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) throw fail();
        e = e * 10 + (text[i] - '0');
        if (e > 4000) throw fail();
      }
      exponent = eneg ? -e : e;
    }
    if (i != text.size()) throw fail();
    mpz_class mant(digits, 10);
    if (neg) mant = -mant;
    long shift = exponent - frac_digits;
    mpq_class q = shift >= 0 ? mpq_class(mant * detail::pow10(static_cast<unsigned>(shift)))
                             : mpq_class(mant, detail::pow10(static_cast<unsigned>(-shift)));
    q.canonicalize();
    return q;
  }

  const mpz_class& mantissa() const { return mantissa_; }
  unsigned scale() const { return scale_; }
  const mpz_class& err() const { return err_; }
  const std::optional<mpq_class>& exact() const { return exact_; }
  bool is_exact() const { return err_ == 0; }

  FixedReal rescaled(unsigned new_scale) const {
    if (new_scale == scale_) return *this;
    if (new_scale > scale_) {
      unsigned up = new_scale - scale_;
      return FixedReal(mantissa_ << up, new_scale, err_ << up, exact_);
    }
    unsigned down = scale_ - new_scale;
    mpz_class div = detail::pow2(down);
    mpz_class m = detail::rdiv(mantissa_, div);
    mpz_class e = detail::cdiv(err_, div) + ((m * div == mantissa_) ? 0 : 1);
    return FixedReal(std::move(m), new_scale, std::move(e), exact_);
  }

  FixedReal operator-() const {
    std::optional<mpq_class> ex;
    if (exact_) ex = -*exact_;
    return FixedReal(-mantissa_, scale_, err_, std::move(ex));
  }

  friend FixedReal operator+(const FixedReal& a, const FixedReal& b) {
    unsigned s = std::max(a.scale_, b.scale_);
    FixedReal x = a.rescaled(s), y = b.rescaled(s);
    std::optional<mpq_class> ex;
    if (x.exact_ && y.exact_) ex = *x.exact_ + *y.exact_;
    return FixedReal(x.mantissa_ + y.mantissa_, s, x.err_ + y.err_, std::move(ex));
  }

  friend FixedReal operator-(const FixedReal& a, const FixedReal& b) { return a + (-b); }

  // Integer scaling: exact on the mantissa, err multiplies by |n|.
  friend FixedReal operator*(const mpz_class& n, const FixedReal& x) {
    std::optional<mpq_class> ex;
    if (x.exact_) ex = mpq_class(n) * *x.exact_;
    mpz_class an = abs(n);
    return FixedReal(n * x.mantissa_, x.scale_, an * x.err_, std::move(ex));
  }

  friend FixedReal operator*(const FixedReal& a, const FixedReal& b) {
    unsigned s = std::max(a.scale_, b.scale_);
    FixedReal x = a.rescaled(s), y = b.rescaled(s);
    mpz_class one = detail::pow2(s);
    mpz_class prod = x.mantissa_ * y.mantissa_;
    mpz_class m = detail::rdiv(prod, one);
    mpz_class spread = abs(x.mantissa_) * y.err_ + abs(y.mantissa_) * x.err_ + x.err_ * y.err_;
    mpz_class e = detail::cdiv(spread, one) + ((m * one == prod) ? 0 : 1);
    std::optional<mpq_class> ex;
    if (x.exact_ && y.exact_) ex = *x.exact_ * *y.exact_;
    return FixedReal(std::move(m), s, std::move(e), std::move(ex));
  }

  friend FixedReal operator/(const FixedReal& a, const FixedReal& b) {
    unsigned s = std::max(a.scale_, b.scale_);
    FixedReal x = a.rescaled(s), y = b.rescaled(s);
    mpz_class ay = abs(y.mantissa_);
    if (ay <= y.err_) throw PrecisionExhausted("FixedReal division: divisor not certified non-zero");
    mpz_class one = detail::pow2(s);
    mpz_class num = x.mantissa_ * one;
    mpz_class m = y.mantissa_ > 0 ? detail::rdiv(num, y.mantissa_) : detail::rdiv(-num, -y.mantissa_);
    mpz_class spread = (abs(x.mantissa_) * y.err_ + ay * x.err_) * one;
    mpz_class e = detail::cdiv(spread, ay * (ay - y.err_)) + 1;
    std::optional<mpq_class> ex;
    if (x.exact_ && y.exact_ && *y.exact_ != 0) ex = *x.exact_ / *y.exact_;
    return FixedReal(std::move(m), s, std::move(e), std::move(ex));
  }

  FixedReal abs_value() const { return mantissa_ < 0 ? -*this : *this; }

  // Certified rational enclosure.
  mpq_class lower() const { return mpq_class(mantissa_ - err_, detail::pow2(scale_)); }
  mpq_class upper() const { return mpq_class(mantissa_ + err_, detail::pow2(scale_)); }

  long double to_long_double() const { return mpz_to_ld(mantissa_, scale_); }

  // Rounded to `digits` places after the decimal point.
  std::string to_decimal(unsigned digits) const {
    mpz_class scaled = detail::rdiv(mantissa_ * detail::pow10(digits), detail::pow2(scale_));
    return format_scaled(scaled, digits);
  }

  static std::string format_scaled(const mpz_class& scaled, unsigned digits) {
    bool neg = scaled < 0;
    std::string s = mpz_class(abs(scaled)).get_str();
    if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
    if (digits > 0) s.insert(s.size() - digits, ".");
    return neg ? "-" + s : s;
  }

  static long double mpz_to_ld(const mpz_class& m, unsigned scale) {
    if (m == 0) return 0.0L;
    std::size_t bits = mpz_sizeinbase(m.get_mpz_t(), 2);
    mpz_class top = abs(m);
    long shift = 0;
    if (bits > 64) {
      shift = static_cast<long>(bits - 64);
      top >>= static_cast<mp_bitcnt_t>(shift);
    }
    unsigned long long hi = 0;
    mpz_export(&hi, nullptr, -1, sizeof(hi), 0, 0, top.get_mpz_t());
    long double v = std::ldexp(static_cast<long double>(hi), static_cast<int>(shift) - static_cast<int>(scale));
    return m < 0 ? -v : v;
  }

 private:
  mpz_class mantissa_;
  unsigned scale_;
  mpz_class err_;
  std::optional<mpq_class> exact_;
};

// Three-way certified comparison. Throws PrecisionExhausted when the gap does
// not exceed the combined error and no exact rational fallback exists.
inline std::strong_ordering compare(const FixedReal& a, const FixedReal& b) {
  unsigned s = std::max(a.scale(), b.scale());
  FixedReal x = a.rescaled(s), y = b.rescaled(s);
  mpz_class diff = x.mantissa() - y.mantissa();
  mpz_class e = x.err() + y.err();
  if (diff > e) return std::strong_ordering::greater;
  if (diff < -e) return std::strong_ordering::less;
  if (e == 0) return std::strong_ordering::equal;
  if (x.exact() && y.exact()) {
    int c = cmp(*x.exact(), *y.exact());
    return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }
  throw PrecisionExhausted("indecisive comparison: gap within combined error of " + e.get_str() + " ulp");
}

inline bool certified_le(const FixedReal& a, const FixedReal& b) { return compare(a, b) != std::strong_ordering::greater; }
inline bool certified_lt(const FixedReal& a, const FixedReal& b) { return compare(a, b) == std::strong_ordering::less; }

// ||x||: distance to the nearest integer, exact on the mantissa. A half-integer
// gives exactly 1/2; an inexact value whose distance may straddle 1/2 is
// reported rather than guessed.
inline FixedReal dist_nearest_int(const FixedReal& x) {
  mpz_class one = detail::pow2(x.scale());
  mpz_class r;
  mpz_fdiv_r(r.get_mpz_t(), x.mantissa().get_mpz_t(), one.get_mpz_t());
  mpz_class d = std::min(r, mpz_class(one - r));
  if (x.err() > 0 && abs(mpz_class(d - one / 2)) <= x.err() && !x.exact())
    throw PrecisionExhausted("dist_nearest_int: ambiguous within err of a half-integer");
  std::optional<mpq_class> ex;
  if (x.exact()) ex = detail::dist_nearest_q(*x.exact());
  return FixedReal(std::move(d), x.scale(), x.err(), std::move(ex));
}

// The integer nearest to x; throws when two integers are candidates.
inline mpz_class nearest_int(const FixedReal& x) {
  mpz_class one = detail::pow2(x.scale());
  if (x.exact()) {
    const mpq_class& q = *x.exact();
    return detail::fdiv(2 * q.get_num() + q.get_den(), 2 * q.get_den());
  }
  mpz_class lo = detail::rdiv(x.mantissa() - x.err(), one);
  mpz_class hi = detail::rdiv(x.mantissa() + x.err(), one);
  if (lo != hi) throw PrecisionExhausted("nearest_int: ambiguous rounding");
  return lo;
}

// ||n * alpha - gamma||, err = |n| err_alpha + err_gamma.
inline FixedReal norm_form(const mpz_class& n, const FixedReal& alpha, const FixedReal& gamma) {
  return dist_nearest_int(n * alpha - gamma);
}

// Fixed-digit decimal of a long double (reports only).
inline std::string ld_decimal(long double v, int digits = 12) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.*Lf", digits, v);
  return buf;
}

}  // namespace bohrgap
