#pragma once

// 128-bit torus kernel for the linear scans.
//
// frac(n * alpha - gamma) is held as an unsigned 128-bit integer in units of
// 2^-128; wrapping arithmetic is exactly reduction mod 1. The stored phase is
// the exact value of n * alpha~ - gamma~ for the rounded inputs, so its error
// is |n| * err(alpha) + err(gamma) in the same units.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bohrgap/errors.hpp"
#include "bohrgap/realfield.hpp"
#include "bohrgap/thresholds.hpp"

namespace bohrgap {

using u128 = unsigned __int128;

inline constexpr u128 kHalf128 = static_cast<u128>(1) << 127;

inline u128 mpz_to_u128(const mpz_class& z) {
  mpz_class r;
  mpz_fdiv_r_2exp(r.get_mpz_t(), z.get_mpz_t(), 128);
  u128 out = 0;
  std::size_t count = 0;
  unsigned long long words[2] = {0, 0};
  mpz_export(words, &count, -1, sizeof(unsigned long long), 0, 0, r.get_mpz_t());
  out = (static_cast<u128>(words[1]) << 64) | words[0];
  return out;
}

inline mpz_class u128_to_mpz(u128 v) {
  unsigned long long words[2] = {static_cast<unsigned long long>(v), static_cast<unsigned long long>(v >> 64)};
  mpz_class z;
  mpz_import(z.get_mpz_t(), 2, -1, sizeof(unsigned long long), 0, 0, words);
  return z;
}

inline long double u128_to_unit(u128 v) { return ldexpl(static_cast<long double>(v), -128); }

// ||phase|| in 2^-128 units; never exceeds 2^127.
inline u128 torus_dist(u128 phase) { return phase <= kHalf128 ? phase : static_cast<u128>(0) - phase; }

// A real reduced mod 1 at 128 bits with its error in 2^-128 ulps.
struct Frac128 {
  u128 value = 0;
  u128 err = 0;
};

inline Frac128 to_frac128(const FixedReal& x) {
  Frac128 f;
  mpz_class m = x.mantissa(), e = x.err();
  if (x.scale() <= 128) {
    unsigned up = 128 - x.scale();
    m <<= up;
    e <<= up;
  } else {
    mpz_class div = detail::pow2(x.scale() - 128);
    mpz_class r = detail::rdiv(m, div);
    e = detail::cdiv(e, div) + ((r * div == m) ? 0 : 1);
    m = r;
  }
  if (e >= detail::pow2(100)) throw PrecisionExhausted("input error too large for the 128-bit scan kernel");
  f.value = mpz_to_u128(m);
  f.err = mpz_to_u128(e);
  return f;
}

// t -> t * alpha - gamma (mod 1) evaluated on integers.
class TorusForm {
 public:
  TorusForm(const FixedReal& alpha, const FixedReal& gamma) {
    Frac128 a = to_frac128(alpha), g = to_frac128(gamma);
    step_ = a.value;
    err_step_ = a.err;
    offset_ = g.value;
    err_offset_ = g.err;
    if (alpha.exact()) alpha_exact_ = *alpha.exact();
    if (gamma.exact()) gamma_exact_ = *gamma.exact();
  }

  u128 step() const { return step_; }
  u128 phase(std::int64_t n) const { return static_cast<u128>(static_cast<__int128>(n)) * step_ - offset_; }
  u128 err(std::uint64_t abs_n) const { return static_cast<u128>(abs_n) * err_step_ + err_offset_; }
  u128 err_step() const { return err_step_; }
  bool has_exact(std::int64_t n) const { return gamma_exact_ && (alpha_exact_ || n == 0); }
  bool is_exact_at_128() const { return err_step_ == 0 && err_offset_ == 0; }

  // Exact ||n alpha - gamma|| for rational inputs (and for n = 0).
  std::optional<mpq_class> exact_dist(std::int64_t n) const {
    if (!has_exact(n)) return std::nullopt;
    if (n == 0) return detail::dist_nearest_q(-*gamma_exact_);
    return detail::dist_nearest_q(mpq_class(mpz_class(static_cast<long>(n))) * *alpha_exact_ - *gamma_exact_);
  }

  // Enclosure of ||n alpha - gamma|| as rationals.
  std::pair<mpq_class, mpq_class> dist_enclosure(std::int64_t n) const {
    if (auto ex = exact_dist(n)) return {*ex, *ex};
    u128 d = torus_dist(phase(n));
    u128 e = err(static_cast<std::uint64_t>(n < 0 ? -n : n));
    mpz_class dz = u128_to_mpz(d), ez = u128_to_mpz(e);
    mpz_class one = detail::pow2(128);
    mpz_class lo = dz - ez;
    if (lo < 0) lo = 0;
    return {mpq_class(lo, one), mpq_class(dz + ez, one)};
  }

  // The nearest integer to n alpha - gamma (the lift witness a).
  mpz_class nearest(std::int64_t n, const FixedReal& alpha, const FixedReal& gamma) const {
    return nearest_int(mpz_class(static_cast<long>(n)) * alpha - gamma);
  }

 private:
  u128 step_ = 0, err_step_ = 0, offset_ = 0, err_offset_ = 0;
  std::optional<mpq_class> alpha_exact_, gamma_exact_;
};

// A threshold on ||.|| at 128 bits. Values >= 1/2 admit everything.
class DistThreshold {
 public:
  DistThreshold() = default;
  explicit DistThreshold(const FixedReal& delta) {
    if (delta.exact()) exact_ = *delta.exact();
    if (delta.lower() >= mpq_class(1, 2)) {
      always_ = true;
      return;
    }
    if (delta.upper() < 0) throw ValidationError("negative threshold");
    Frac128 f = to_frac128(delta);
    // delta < 1/2 + err, so the 128-bit value did not wrap unless err is huge.
    value_ = f.value;
    err_ = f.err;
  }

  // The threshold base^e (e.g. M^(-1/(k-1)) or n^-sqrt(eps)), which need not
  // be rational; undecided comparisons go back to compare_with_power.
  static DistThreshold power(const mpq_class& base, const Exponent& e) {
    DistThreshold t;
    t.power_base_ = base;
    t.power_exp_ = e;
    if (e.is_rational()) {
      if (compare_with_power(mpq_class(1, 2), base, e) <= 0) {
        t.always_ = true;
        return t;
      }
    } else if (e.approx() >= 0 && base >= 1) {
      t.always_ = true;
      return t;
    }
    mpfr_t lo, hi;
    mpfr_inits2(256, lo, hi, static_cast<mpfr_ptr>(nullptr));
    e.power_interval(base, 256, lo, hi);
    mpz_class zlo, zhi;
    mpfr_mul_2ui(lo, lo, 128, MPFR_RNDD);
    mpfr_mul_2ui(hi, hi, 128, MPFR_RNDU);
    mpfr_get_z(zlo.get_mpz_t(), lo, MPFR_RNDD);
    mpfr_get_z(zhi.get_mpz_t(), hi, MPFR_RNDU);
    mpfr_clears(lo, hi, static_cast<mpfr_ptr>(nullptr));
    if (zlo >= detail::pow2(127)) {
      t.always_ = true;
      return t;
    }
    if (zlo < 0) zlo = 0;
    if (zhi > detail::pow2(127)) zhi = detail::pow2(127);
    mpz_class mid = (zlo + zhi) / 2;
    t.value_ = mpz_to_u128(mid);
    t.err_ = mpz_to_u128(zhi - mid + 1);
    return t;
  }

  bool always() const { return always_; }
  u128 value() const { return value_; }
  const std::optional<mpq_class>& exact() const { return exact_; }
  bool is_power() const { return power_base_.has_value(); }

  // Decide d in [lo, hi] against the threshold when the 128-bit test could not.
  std::optional<bool> fallback(const mpq_class& lo, const mpq_class& hi) const {
    if (power_base_) {
      if (lo == hi && lo == 0) return true;
      int c = compare_with_power(lo, hi, *power_base_, *power_exp_);
      return c <= 0;
    }
    if (exact_ && lo == hi) return lo <= *exact_;
    return std::nullopt;
  }

  enum class Decision { yes, no, undecided };

  // Is a distance d (error e) at most the threshold?
  Decision le(u128 d, u128 e) const {
    if (always_) return Decision::yes;
    u128 total = e + err_;
    if (d <= value_ && value_ - d >= total) return Decision::yes;
    if (d > value_ && d - value_ > total) return Decision::no;
    if (total == 0) return d <= value_ ? Decision::yes : Decision::no;
    return Decision::undecided;
  }

 private:
  bool always_ = false;
  u128 value_ = 0, err_ = 0;
  std::optional<mpq_class> exact_;
  std::optional<mpq_class> power_base_;
  std::optional<Exponent> power_exp_;
};

// Certified ||n alpha - gamma|| <= delta, exact fallback for rational data.
inline bool dist_within(const TorusForm& form, const DistThreshold& thr, std::int64_t n, std::size_t coord = 0) {
  u128 d = torus_dist(form.phase(n));
  u128 e = form.err(static_cast<std::uint64_t>(n < 0 ? -n : n));
  switch (thr.le(d, e)) {
    case DistThreshold::Decision::yes: return true;
    case DistThreshold::Decision::no: return false;
    case DistThreshold::Decision::undecided: break;
  }
  auto [lo, hi] = form.dist_enclosure(n);
  if (auto r = thr.fallback(lo, hi)) return *r;
  throw PrecisionExhausted("membership undecided at n=" + std::to_string(n) + ", coordinate " +
                           std::to_string(coord + 1));
}

// alpha in R^d with d = k - 1.
struct TargetVector {
  std::vector<FixedReal> alphas;

  std::size_t d() const { return alphas.size(); }
  std::size_t k() const { return alphas.size() + 1; }
  void validate() const {
    if (alphas.empty()) throw ValidationError("target vector needs d >= 1 (k >= 2)");
    for (const auto& a : alphas)
      if (a.scale() != alphas.front().scale()) throw ValidationError("target vector entries must share one scale");
  }
};

inline std::vector<FixedReal> zeros(std::size_t d, unsigned scale = kDefaultScale) {
  return std::vector<FixedReal>(d, FixedReal::from_int(0, scale));
}

inline std::vector<TorusForm> make_forms(const TargetVector& alpha, const std::vector<FixedReal>& gamma) {
  if (gamma.size() != alpha.d()) throw ValidationError("gamma must have length k-1");
  std::vector<TorusForm> forms;
  forms.reserve(alpha.d());
  for (std::size_t i = 0; i < alpha.d(); ++i) forms.emplace_back(alpha.alphas[i], gamma[i]);
  return forms;
}

// Real constructors accepted on input: rat:p/q, sqrt:m, dec:<decimal>, or a
// bare decimal.
inline FixedReal parse_real(std::string_view text, unsigned scale = kDefaultScale) {
  auto starts = [&](std::string_view p) { return text.substr(0, p.size()) == p; };
  if (starts("rat:")) {
    std::string body(text.substr(4));
    auto slash = body.find('/');
    mpz_class p, q = 1;
    try {
      if (slash == std::string::npos) {
        p = mpz_class(body, 10);
      } else {
        p = mpz_class(body.substr(0, slash), 10);
        q = mpz_class(body.substr(slash + 1), 10);
      }
    } catch (const std::invalid_argument&) {
      throw ValidationError("malformed rational constructor: '" + std::string(text) + "'");
    }
    if (q == 0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
    return FixedReal::from_rational(mpq_class(p, q), scale);
  }
  if (starts("sqrt:")) {
    std::string body(text.substr(5));
    if (body.empty() || body.find_first_not_of("0123456789") != std::string::npos)
      throw ValidationError("malformed sqrt constructor: '" + std::string(text) + "'");
    return FixedReal::sqrt_int(std::stoul(body), scale);
  }
  if (starts("dec:")) return FixedReal::from_decimal(text.substr(4), scale);
  return FixedReal::from_decimal(text, scale);
}

}  // namespace bohrgap
