#pragma once

// Restricted sums of reciprocals of fractional parts over the support set
//   G = { n : ||n alpha_i - gamma_i|| >= n^-sqrt(eps) for all i },
// their dyadic decomposition, approximating functions psi and the modified
// Psi, Duffin-Schaeffer hypothesis checks and the fibre Gallagher experiment.
//
// Terms are formed from the 128-bit kernel and summed in long double with
// Neumaier compensation; every sum carries a relative error bound.

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "bohrgap/bohr.hpp"
#include "bohrgap/counting.hpp"
#include "bohrgap/errors.hpp"
#include "bohrgap/minima.hpp"
#include "bohrgap/realfield.hpp"
#include "bohrgap/thresholds.hpp"
#include "bohrgap/torus.hpp"

namespace bohrgap {

// Neumaier compensated accumulator.
struct Accumulator {
  long double sum = 0, comp = 0, abs_sum = 0;
  std::uint64_t terms = 0;

  void add(long double x) {
    long double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) comp += (sum - t) + x;
    else comp += (x - t) + sum;
    sum = t;
    abs_sum += std::fabs(x);
    ++terms;
  }
  long double value() const { return sum + comp; }
  // Summation error bound (Neumaier: about 2u sum|x| plus a second-order term).
  long double rounding_bound() const {
    const long double u = LDBL_EPSILON / 2;
    return 2 * u * std::fabs(value()) + 2 * static_cast<long double>(terms) * u * u * abs_sum;
  }
};

// ---------------------------------------------------------------------------
// Support set

class SupportMask {
 public:
  SupportMask() = default;

  static SupportMask trivial(std::int64_t N) {
    SupportMask m;
    m.trivial_ = true;
    m.N_ = N;
    return m;
  }

  // n in G iff ||n alpha_i - gamma_i|| >= n^-tau for all i, tau = sqrt(eps).
  static SupportMask build(const TargetVector& alpha, const std::vector<FixedReal>& gamma, const mpq_class& eps,
                           std::int64_t N) {
    if (N < 1) throw ValidationError("support mask needs N >= 1");
    if (eps <= 0 || eps >= 1) throw ValidationError("eps must lie in (0, 1)");
    auto forms = make_forms(alpha, gamma);
    guard_precision(alpha, gamma, N);
    SupportMask m;
    m.N_ = N;
    m.eps_ = eps;
    m.bits_.assign(static_cast<std::size_t>(N) + 1, 0);
    const Exponent neg_tau = Exponent::sqrt_of(eps).negated();
    const long double tau = -neg_tau.approx();
    for (std::int64_t n = 2; n <= N; ++n) {
      long double t = powl(static_cast<long double>(n), -tau);
      bool in = true;
      for (const auto& f : forms) {
        if (!at_least(f, n, t, neg_tau)) {
          in = false;
          break;
        }
      }
      m.bits_[static_cast<std::size_t>(n)] = in;
    }
    return m;
  }

  bool trivial_mask() const { return trivial_; }
  std::int64_t N() const { return N_; }
  const mpq_class& eps() const { return eps_; }
  bool test(std::int64_t n) const {
    if (n < 1 || n > N_) return false;
    return trivial_ || bits_[static_cast<std::size_t>(n)];
  }
  std::int64_t excluded() const {
    if (trivial_) return 0;
    std::int64_t c = 0;
    for (std::int64_t n = 1; n <= N_; ++n) c += !bits_[static_cast<std::size_t>(n)];
    return c;
  }

  static void guard_precision(const TargetVector& alpha, const std::vector<FixedReal>& gamma, std::int64_t N) {
    (void)gamma;
    for (const auto& a : alpha.alphas) {
      if (a.exact()) continue;
      // (N + 1) 2^-scale must stay far below the smallest threshold N^-1.
      if (a.scale() < 64 + 2 * static_cast<unsigned>(std::log2(static_cast<double>(N) + 2)))
        throw PrecisionExhausted("scale too small for the support threshold at this N");
    }
  }

  // ||n alpha - gamma|| >= n^-tau, long double first, exact on near ties.
  static bool at_least(const TorusForm& f, std::int64_t n, long double t, const Exponent& neg_tau) {
    u128 d = torus_dist(f.phase(n));
    u128 e = f.err(static_cast<std::uint64_t>(n));
    long double lo = u128_to_unit(d > e ? d - e : 0), hi = u128_to_unit(d + e);
    const long double slack = 1e-15L * t;
    if (lo > t + slack) return true;
    if (hi < t - slack) return false;
    auto [qlo, qhi] = f.dist_enclosure(n);
    return compare_with_power(qlo, qhi, mpq_class(n), neg_tau) >= 0;
  }

 private:
  bool trivial_ = false;
  std::int64_t N_ = 0;
  mpq_class eps_ = 0;
  std::vector<std::uint8_t> bits_;
};

inline SupportMask support_mask(const TargetVector& alpha, const std::vector<FixedReal>& gamma, const mpq_class& eps,
                                std::int64_t N) {
  return SupportMask::build(alpha, gamma, eps, N);
}

namespace detail {

// 1 / prod ||n alpha_i - gamma_i|| and its relative error; nullopt on an
// exact zero factor.
struct Reciprocal {
  long double value = 0;
  long double rel_err = 0;
};

inline std::optional<Reciprocal> reciprocal_term(const std::vector<TorusForm>& forms, std::int64_t n) {
  Reciprocal r;
  long double prod = 1;
  for (const auto& f : forms) {
    u128 d = torus_dist(f.phase(n));
    u128 e = f.err(static_cast<std::uint64_t>(n < 0 ? -n : n));
    if (d <= e) {
      auto [lo, hi] = f.dist_enclosure(n);
      if (hi == 0) return std::nullopt;
      if (lo == 0) throw PrecisionExhausted("factor at n=" + std::to_string(n) + " indistinguishable from 0");
      long double v = Exponent::mpq_to_ld((lo + hi) / 2);
      prod *= v;
      r.rel_err += Exponent::mpq_to_ld((hi - lo) / (lo + hi)) + LDBL_EPSILON;
      continue;
    }
    long double v = u128_to_unit(d);
    prod *= v;
    r.rel_err += static_cast<long double>(e) / static_cast<long double>(d - e) + LDBL_EPSILON;
  }
  r.value = 1 / prod;
  r.rel_err += 2 * LDBL_EPSILON * static_cast<long double>(forms.size() + 1);
  return r;
}

inline std::vector<std::int64_t> powers_of_ten_upto(std::int64_t N) {
  std::vector<std::int64_t> out;
  for (std::int64_t c = 10; c <= N; c *= 10) out.push_back(c);
  if (out.empty() || out.back() != N) out.push_back(N);
  return out;
}

inline long double log_pow(long double n, std::size_t e) { return powl(logl(n), static_cast<long double>(e)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// T_N and T*_N

struct SumPoint {
  std::int64_t N = 0;
  long double T = 0, T_err = 0;
  std::optional<long double> T_star;
  long double T_star_err = 0;
  std::uint64_t terms = 0;
  std::optional<mpq_class> T_exact, T_star_exact;  // rational inputs, small N

  long double ratio_T(std::size_t k) const {
    return T / (static_cast<long double>(N) * detail::log_pow(static_cast<long double>(N), k - 1));
  }
  std::optional<long double> ratio_star() const {
    if (!T_star || T == 0) return std::nullopt;
    return *T_star / T;
  }
};

struct SumSeries {
  std::size_t k = 0;
  mpq_class eps;
  bool restricted = true;
  std::vector<SumPoint> points;
};

// T_N (and T*_N when a totient table is given) at each checkpoint.
inline SumSeries t_sums(const TargetVector& alpha, const std::vector<FixedReal>& gamma, const SupportMask& mask,
                        std::vector<std::int64_t> checkpoints, const TotientTable* phi = nullptr,
                        std::int64_t exact_up_to = 10000) {
  auto forms = make_forms(alpha, gamma);
  if (checkpoints.empty()) checkpoints = detail::powers_of_ten_upto(mask.N());
  std::sort(checkpoints.begin(), checkpoints.end());
  const std::int64_t N = checkpoints.back();
  if (N > mask.N()) throw ValidationError("checkpoint beyond the support mask range");
  if (phi && static_cast<std::uint64_t>(N) > phi->limit()) throw ValidationError("totient table does not cover N");
  bool rational = true;
  for (std::size_t i = 0; i < alpha.d(); ++i) rational = rational && alpha.alphas[i].exact() && gamma[i].exact();
  const bool exact = rational && N <= exact_up_to;

  SumSeries s;
  s.k = alpha.k();
  s.eps = mask.eps();
  s.restricted = !mask.trivial_mask();
  Accumulator T, Ts;
  long double T_rel = 0, Ts_rel = 0;
  mpq_class qT = 0, qTs = 0;
  std::size_t next = 0;
  for (std::int64_t n = 1; n <= N; ++n) {
    if (mask.test(n)) {
      auto term = detail::reciprocal_term(forms, n);
      if (!term) throw GuardViolation("exact zero factor on the support set at n=" + std::to_string(n));
      T.add(term->value);
      T_rel += term->value * term->rel_err;
      if (phi) {
        long double w = phi->ratio(static_cast<std::uint64_t>(n));
        Ts.add(w * term->value);
        Ts_rel += w * term->value * (term->rel_err + LDBL_EPSILON);
      }
      if (exact) {
        mpq_class prod = 1;
        for (std::size_t i = 0; i < forms.size(); ++i) prod *= *forms[i].exact_dist(n);
        mpq_class inv = 1 / prod;
        qT += inv;
        if (phi) qTs += mpq_class(mpz_class(static_cast<unsigned long>((*phi)(static_cast<std::uint64_t>(n)))),
                                  mpz_class(static_cast<unsigned long>(n))) * inv;
      }
    }
    while (next < checkpoints.size() && checkpoints[next] == n) {
      SumPoint p;
      p.N = n;
      p.T = T.value();
      p.T_err = T_rel + T.rounding_bound();
      p.terms = T.terms;
      if (phi) {
        p.T_star = Ts.value();
        p.T_star_err = Ts_rel + Ts.rounding_bound();
      }
      if (exact) {
        qT.canonicalize();
        p.T_exact = qT;
        if (phi) {
          qTs.canonicalize();
          p.T_star_exact = qTs;
        }
      }
      s.points.push_back(p);
      ++next;
    }
  }
  return s;
}

inline SumPoint t_sum(const TargetVector& alpha, const std::vector<FixedReal>& gamma, std::int64_t N,
                      const SupportMask& mask, const TotientTable* phi = nullptr) {
  return t_sums(alpha, gamma, mask, {N}, phi).points.back();
}

inline void write_sums_csv(std::ostream& os, const SumSeries& s) {
  os << "N,T,T_star,ratio_T,ratio_star,eps,k\n";
  for (const auto& p : s.points) {
    os << p.N << ',' << ld_decimal(p.T) << ',' << (p.T_star ? ld_decimal(*p.T_star) : "") << ','
       << ld_decimal(p.ratio_T(s.k)) << ',' << (p.ratio_star() ? ld_decimal(*p.ratio_star()) : "") << ','
       << q_decimal(s.eps, 12) << ',' << s.k << '\n';
  }
}

// ---------------------------------------------------------------------------
// Dyadic decomposition

struct DyadicTable {
  std::int64_t N = 0;
  std::map<std::vector<int>, std::uint64_t> cells;  // (i_1..i_{k-1}) -> count
  mpz_class reconstruction;                         // sum count 2^(sum i)
  int max_index = 0;
  std::uint64_t zero_excluded = 0;  // exact zeros (off the support set by definition)
};

namespace detail {

// i with 2^-(i+1) < ||.|| <= 2^-i, or nullopt at an exact zero.
inline std::optional<int> dyadic_index(const TorusForm& f, std::int64_t n) {
  auto index_of = [](const mpq_class& x) {
    // smallest i >= 0 with x > 2^-(i+1)
    int i = 0;
    mpq_class t(1, 2);
    while (!(x > t)) {
      ++i;
      t /= 2;
    }
    return i;
  };
  u128 d = torus_dist(f.phase(n));
  u128 e = f.err(static_cast<std::uint64_t>(n < 0 ? -n : n));
  if (d > e) {
    auto width = [](u128 v) {
      int b = 0;
      while (v) {
        ++b;
        v >>= 1;
      }
      return b;
    };
    u128 lo = d - e, hi = d + e;
    // i = 128 - bitlen(D) unless D is an exact power of two.
    auto idx = [&](u128 D) {
      int m = width(D) - 1;
      bool pow2 = (D & (D - 1)) == 0;
      return pow2 ? 128 - m : 127 - m;
    };
    if (idx(lo) == idx(hi) && (lo & (lo - 1)) != 0 && (hi & (hi - 1)) != 0) return idx(lo);
  }
  auto [qlo, qhi] = f.dist_enclosure(n);
  if (qhi == 0) return std::nullopt;
  if (qlo == 0) throw PrecisionExhausted("dyadic cell undecided at n=" + std::to_string(n));
  int a = index_of(qlo), b = index_of(qhi);
  if (a != b) throw PrecisionExhausted("dyadic cell undecided at n=" + std::to_string(n));
  return a;
}

}  // namespace detail

inline DyadicTable dyadic_table(const TargetVector& alpha, const std::vector<FixedReal>& gamma, std::int64_t N,
                                const SupportMask& mask) {
  auto forms = make_forms(alpha, gamma);
  if (N > mask.N()) throw ValidationError("N beyond the support mask range");
  DyadicTable t;
  t.N = N;
  std::vector<int> cell(forms.size());
  for (std::int64_t n = 1; n <= N; ++n) {
    if (!mask.test(n)) continue;
    bool zero = false;
    for (std::size_t j = 0; j < forms.size() && !zero; ++j) {
      auto i = detail::dyadic_index(forms[j], n);
      if (!i) zero = true;
      else cell[j] = *i;
    }
    if (zero) {
      ++t.zero_excluded;
      continue;
    }
    ++t.cells[cell];
  }
  for (const auto& [c, count] : t.cells) {
    int s = 0;
    for (auto i : c) {
      s += i;
      t.max_index = std::max(t.max_index, i);
    }
    t.reconstruction += mpz_class(static_cast<unsigned long>(count)) << s;
  }
  return t;
}

// sum count 2^(sum i) <= T < 2^(k-1) sum count 2^(sum i), within T's error.
inline bool dyadic_sandwich(const DyadicTable& t, const SumPoint& p, std::size_t k) {
  long double r = t.reconstruction.get_d();
  long double hi = r * powl(2.0L, static_cast<long double>(k - 1));
  return r <= p.T + p.T_err && p.T - p.T_err < hi;
}

inline nlohmann::json to_json(const DyadicTable& t) {
  nlohmann::json j;
  j["N"] = t.N;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [c, count] : t.cells) cells.push_back({{"cell", c}, {"count", count}});
  j["cells"] = cells;
  j["reconstruction"] = t.reconstruction.get_str();
  j["max_index"] = t.max_index;
  j["zero_excluded"] = t.zero_excluded;
  return j;
}

// ---------------------------------------------------------------------------
// Approximating functions

enum class PsiFamily { divergent, convergent, power, table };
enum class Series { divergent, convergent, unknown };

inline std::string to_string(Series s) {
  switch (s) {
    case Series::divergent: return "divergent";
    case Series::convergent: return "convergent";
    case Series::unknown: return "unknown";
  }
  return "unknown";
}

// psi(n):
//   divergent:  c / (n (log n)^k)
//   convergent: c / (n (log n)^k (log log n)^2)
//   power:      c n^-s
//   table:      given values psi(1..m), zero beyond
// The log families are held at psi(3) for n < 3, which keeps them
// non-increasing from n = 1.
class ApproxFunction {
 public:
  static ApproxFunction divergent(std::size_t k, const mpq_class& c = 1) { return ApproxFunction(PsiFamily::divergent, k, c, 0); }
  static ApproxFunction convergent(std::size_t k, const mpq_class& c = 1) {
    return ApproxFunction(PsiFamily::convergent, k, c, 0);
  }
  static ApproxFunction power(const mpq_class& s, const mpq_class& c = 1) { return ApproxFunction(PsiFamily::power, 0, c, s); }
  static ApproxFunction table(std::vector<mpq_class> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] < 0) throw ValidationError("psi table values must be non-negative");
      if (i && values[i] > values[i - 1])
        throw ValidationError("psi table is not non-increasing at n=" + std::to_string(i + 1));
    }
    ApproxFunction f(PsiFamily::table, 0, 1, 0);
    f.table_ = std::move(values);
    return f;
  }

  PsiFamily family() const { return family_; }
  std::size_t k() const { return k_; }

  long double operator()(std::int64_t n) const {
    if (n < 1) throw ValidationError("psi is defined on n >= 1");
    const long double c = Exponent::mpq_to_ld(c_);
    auto x = static_cast<long double>(family_ == PsiFamily::power || family_ == PsiFamily::table ? n : std::max<std::int64_t>(n, 3));
    switch (family_) {
      case PsiFamily::divergent: return c / (x * detail::log_pow(x, k_));
      case PsiFamily::convergent: {
        long double ll = logl(logl(x));
        return c / (x * detail::log_pow(x, k_) * ll * ll);
      }
      case PsiFamily::power: return c * powl(x, -Exponent::mpq_to_ld(s_));
      case PsiFamily::table:
        return static_cast<std::size_t>(n) <= table_.size() ? Exponent::mpq_to_ld(table_[static_cast<std::size_t>(n) - 1]) : 0;
    }
    return 0;
  }

  // Enclosure of psi(n) at `prec` bits.
  std::pair<mpq_class, mpq_class> enclosure(std::int64_t n, mpfr_prec_t prec = 192) const {
    if (family_ == PsiFamily::table) {
      mpq_class v = static_cast<std::size_t>(n) <= table_.size() ? table_[static_cast<std::size_t>(n) - 1] : mpq_class(0);
      return {v, v};
    }
    mpq_class out[2];
    mpfr_rnd_t modes[2] = {MPFR_RNDD, MPFR_RNDU};
    for (int side = 0; side < 2; ++side) {
      // Denominators round the other way.
      mpfr_rnd_t down = modes[1 - side], up = modes[side];
      mpfr_t x, t, d;
      mpfr_inits2(prec, x, t, d, static_cast<mpfr_ptr>(nullptr));
      long xn = family_ == PsiFamily::power ? n : std::max<std::int64_t>(n, 3);
      mpfr_set_si(x, xn, MPFR_RNDN);
      if (family_ == PsiFamily::power) {
        mpfr_set_q(t, s_.get_mpq_t(), down);
        mpfr_pow(d, x, t, down);  // n^s
      } else {
        mpfr_log(t, x, down);
        mpfr_pow_ui(d, t, static_cast<unsigned long>(k_), down);
        mpfr_mul(d, d, x, down);
        if (family_ == PsiFamily::convergent) {
          mpfr_log(t, x, down);
          mpfr_log(t, t, down);
          mpfr_sqr(t, t, down);
          mpfr_mul(d, d, t, down);
        }
      }
      mpfr_set_q(t, c_.get_mpq_t(), up);
      mpfr_div(t, t, d, up);
      mpf_class f(0, static_cast<mp_bitcnt_t>(prec));
      mpfr_get_f(f.get_mpf_t(), t, up);
      out[side] = mpq_class(f);
      mpfr_clears(x, t, d, static_cast<mpfr_ptr>(nullptr));
    }
    return {out[0], out[1]};
  }

  // Divergence of sum psi(n) (log n)^(k-1).
  Series classify(std::size_t k) const {
    switch (family_) {
      case PsiFamily::divergent: return k_ <= k ? Series::divergent : Series::convergent;
      case PsiFamily::convergent: return k_ + 1 <= k ? Series::divergent : Series::convergent;
      case PsiFamily::power: return s_ > 1 ? Series::convergent : Series::divergent;
      case PsiFamily::table: return Series::convergent;  // finitely supported
    }
    return Series::unknown;
  }

  // psi(n) >= psi(n+1) on [from, n_max] in long double; analytic for the
  // built-in families, exact for tables.
  bool certify_decreasing(std::int64_t n_max, std::int64_t from = 3) const {
    if (family_ == PsiFamily::table) return true;  // checked on construction
    long double prev = (*this)(from);
    for (std::int64_t n = from + 1; n <= n_max; ++n) {
      long double v = (*this)(n);
      if (v > prev) return false;
      prev = v;
    }
    return true;
  }

  nlohmann::json describe() const {
    nlohmann::json j;
    const char* names[] = {"divergent", "convergent", "power", "table"};
    j["family"] = names[static_cast<int>(family_)];
    j["c"] = c_.get_str();
    if (family_ == PsiFamily::divergent || family_ == PsiFamily::convergent) j["k"] = k_;
    if (family_ == PsiFamily::power) j["s"] = s_.get_str();
    if (family_ == PsiFamily::table) j["size"] = table_.size();
    return j;
  }

 private:
  ApproxFunction(PsiFamily f, std::size_t k, mpq_class c, mpq_class s) : family_(f), k_(k), c_(std::move(c)), s_(std::move(s)) {
    if (c_ <= 0) throw ValidationError("psi constant must be positive");
    if (f == PsiFamily::power && s_ <= 0) throw ValidationError("psi power must be positive");
    if ((f == PsiFamily::divergent || f == PsiFamily::convergent) && k_ < 1) throw ValidationError("psi family needs k >= 1");
  }

  PsiFamily family_;
  std::size_t k_ = 0;
  mpq_class c_, s_;
  std::vector<mpq_class> table_;
};

// Psi(n) = psi(n) / prod ||n alpha_i - gamma_i|| on G, else 0.
class PsiModified {
 public:
  PsiModified(ApproxFunction psi, const TargetVector& alpha, const std::vector<FixedReal>& gamma, const mpq_class& eps)
      : psi_(std::move(psi)), forms_(make_forms(alpha, gamma)), neg_tau_(Exponent::sqrt_of(eps).negated()) {
    if (eps <= 0 || eps >= 1) throw ValidationError("eps must lie in (0, 1)");
  }

  bool on_support(std::int64_t n) const {
    if (n < 2) return false;
    long double t = powl(static_cast<long double>(n), neg_tau_.approx());
    for (const auto& f : forms_)
      if (!SupportMask::at_least(f, n, t, neg_tau_)) return false;
    return true;
  }

  long double operator()(std::int64_t n) const { return on_support(n) ? off_mask_value(n) : 0; }

  // psi(n) / prod ||.|| without the support test (n known to lie in G).
  long double off_mask_value(std::int64_t n) const {
    auto r = detail::reciprocal_term(forms_, n);
    if (!r) throw GuardViolation("exact zero factor on the support set");
    return psi_(n) * r->value;
  }

  const ApproxFunction& psi() const { return psi_; }

 private:
  ApproxFunction psi_;
  std::vector<TorusForm> forms_;
  Exponent neg_tau_;
};

inline PsiModified psi_modified(const ApproxFunction& psi, const TargetVector& alpha,
                                const std::vector<FixedReal>& gamma, const mpq_class& eps) {
  return PsiModified(psi, alpha, gamma, eps);
}

// ---------------------------------------------------------------------------
// Duffin-Schaeffer hypotheses

struct DsPoint {
  std::int64_t N = 0;
  long double L = 0, U = 0, R = 0;
  long double U_minus_L = 0;  // a sum of non-negative terms
  long double L_over_R = 0, U_over_R = 0;
};

struct DsReport {
  std::size_t k = 0;
  mpq_class eps;
  Series series = Series::unknown;
  std::vector<DsPoint> points;
  bool l_le_u = true;
  long double spread_L = 0, spread_U = 0;  // max/min of the ratios
};

inline DsReport ds_hypothesis_check(const ApproxFunction& psi, const TargetVector& alpha,
                                    const std::vector<FixedReal>& gamma, const mpq_class& eps,
                                    std::vector<std::int64_t> checkpoints, const TotientTable& phi) {
  if (checkpoints.empty()) throw ValidationError("ds check needs checkpoints");
  std::sort(checkpoints.begin(), checkpoints.end());
  const std::int64_t N = checkpoints.back();
  if (static_cast<std::uint64_t>(N) > phi.limit()) throw ValidationError("totient table does not cover N");
  const std::size_t k = alpha.k();
  SupportMask mask = support_mask(alpha, gamma, eps, N);
  auto forms = make_forms(alpha, gamma);
  DsReport rep;
  rep.k = k;
  rep.eps = eps;
  rep.series = psi.classify(k);
  Accumulator L, U, R, D;
  std::size_t next = 0;
  for (std::int64_t n = 1; n <= N; ++n) {
    long double pn = psi(n);
    if (n >= 2) R.add(pn * detail::log_pow(static_cast<long double>(n), k - 1));
    if (mask.test(n)) {
      auto r = detail::reciprocal_term(forms, n);
      if (!r) throw GuardViolation("exact zero factor on the support set");
      long double Psi = pn * r->value;
      long double w = phi.ratio(static_cast<std::uint64_t>(n));
      U.add(Psi);
      L.add(w * Psi);
      D.add((1 - w) * Psi);
    }
    while (next < checkpoints.size() && checkpoints[next] == n) {
      DsPoint p;
      p.N = n;
      p.L = L.value();
      p.U = U.value();
      p.R = R.value();
      p.U_minus_L = D.value();
      p.L_over_R = p.L / p.R;
      p.U_over_R = p.U / p.R;
      rep.l_le_u = rep.l_le_u && p.U_minus_L >= 0;
      rep.points.push_back(p);
      ++next;
    }
  }
  auto spread = [&](auto get) {
    long double lo = get(rep.points.front()), hi = lo;
    for (const auto& p : rep.points) {
      lo = std::min(lo, get(p));
      hi = std::max(hi, get(p));
    }
    return lo > 0 ? hi / lo : std::numeric_limits<long double>::infinity();
  };
  rep.spread_L = spread([](const DsPoint& p) { return p.L_over_R; });
  rep.spread_U = spread([](const DsPoint& p) { return p.U_over_R; });
  return rep;
}

inline nlohmann::json to_json(const DsReport& r) {
  nlohmann::json j;
  j["k"] = r.k;
  j["eps"] = q_decimal(r.eps, 12);
  j["series"] = to_string(r.series);
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points)
    pts.push_back({{"N", p.N},
                   {"L", ld_decimal(p.L)},
                   {"U", ld_decimal(p.U)},
                   {"R", ld_decimal(p.R)},
                   {"L_over_R", ld_decimal(p.L_over_R)},
                   {"U_over_R", ld_decimal(p.U_over_R)}});
  j["points"] = pts;
  j["L_le_U"] = r.l_le_u;
  j["spread_L_over_R"] = ld_decimal(r.spread_L);
  j["spread_U_over_R"] = ld_decimal(r.spread_U);
  return j;
}

// Sum of phi(n)/n over B(delta) minus B(eta delta) equals the difference of the
// two sums, term by term in fixed point.
struct EtaSplit {
  std::uint64_t outer = 0, inner = 0;
  bool nested = false;
  bool identity = false;
  mpz_class difference_sum;
};

inline EtaSplit eta_split_check(const BohrSpec& spec, const mpq_class& eta, const TotientTable& phi,
                                unsigned scale = 96) {
  if (eta <= 0 || eta >= 1) throw ValidationError("eta must lie in (0, 1)");
  BohrSpec small = spec.scaled_delta(eta);
  BohrSet big = restricted_bohr(spec), tiny = restricted_bohr(small);
  EtaSplit r;
  r.outer = big.members.size();
  r.inner = tiny.members.size();
  r.nested = std::includes(big.members.begin(), big.members.end(), tiny.members.begin(), tiny.members.end());
  const mpz_class one = detail::pow2(scale);
  auto term = [&](std::int64_t n) {
    return detail::fdiv(mpz_class(static_cast<unsigned long>(phi(static_cast<std::uint64_t>(n)))) * one,
                        mpz_class(static_cast<unsigned long>(n)));
  };
  mpz_class s_big = 0, s_tiny = 0;
  for (auto n : big.members) s_big += term(n);
  for (auto n : tiny.members) s_tiny += term(n);
  std::vector<std::int64_t> diff;
  std::set_difference(big.members.begin(), big.members.end(), tiny.members.begin(), tiny.members.end(),
                      std::back_inserter(diff));
  for (auto n : diff) r.difference_sum += term(n);
  r.identity = r.nested && r.difference_sum == s_big - s_tiny;
  return r;
}

// ---------------------------------------------------------------------------
// Fibre Gallagher experiment

struct GallagherSample {
  std::uint64_t id = 0;
  mpz_class alpha_bits;  // alpha_k = alpha_bits / 2^128
  std::vector<std::uint64_t> hits;  // per checkpoint
  std::optional<std::int64_t> first_witness;
  std::vector<long double> runmin;  // per checkpoint
  std::uint64_t undecided = 0;
};

struct GallagherReport {
  std::uint64_t seed = 0;
  std::string generator = "mt19937_64";
  std::int64_t N = 0;
  std::int64_t n_start = 3;
  std::vector<std::int64_t> checkpoints;
  std::vector<GallagherSample> samples;
  long double hit_fraction = 0;
  std::vector<long double> median_hits;  // per checkpoint
};

namespace detail {

inline long double median(std::vector<long double> v) {
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

}  // namespace detail

// For each alpha_k uniform in [0, 1) (128 random bits): hits n in [3, N] with
// prod ||n alpha_i - gamma_i|| ||n alpha_k|| < psi(n).
inline GallagherReport gallagher_experiment(const TargetVector& alpha, const std::vector<FixedReal>& gamma,
                                            const ApproxFunction& psi, std::uint64_t samples, std::int64_t N,
                                            std::uint64_t seed, std::vector<std::int64_t> checkpoints = {}) {
  if (samples < 1) throw ValidationError("need at least one sample");
  if (N < 3) throw ValidationError("experiment needs N >= 3");
  auto forms = make_forms(alpha, gamma);
  const std::size_t k = alpha.k();  // d fixed coordinates plus alpha_k
  if (checkpoints.empty()) checkpoints = detail::powers_of_ten_upto(N);
  std::sort(checkpoints.begin(), checkpoints.end());
  if (checkpoints.back() != N) throw ValidationError("last checkpoint must be N");

  GallagherReport rep;
  rep.seed = seed;
  rep.N = N;
  rep.checkpoints = checkpoints;
  std::mt19937_64 rng(seed);

  // psi(n) and n (log n)^k once.
  std::vector<long double> psi_v(static_cast<std::size_t>(N) + 1), scale_v(static_cast<std::size_t>(N) + 1);
  for (std::int64_t n = 3; n <= N; ++n) {
    psi_v[static_cast<std::size_t>(n)] = psi(n);
    scale_v[static_cast<std::size_t>(n)] = static_cast<long double>(n) * detail::log_pow(static_cast<long double>(n), k);
  }
  // The fixed coordinates, as long double distances with relative error.
  std::vector<long double> fixed_v(static_cast<std::size_t>(N) + 1), fixed_rel(static_cast<std::size_t>(N) + 1);
  std::vector<std::uint8_t> fixed_zero(static_cast<std::size_t>(N) + 1, 0);
  for (std::int64_t n = 3; n <= N; ++n) {
    auto r = detail::reciprocal_term(forms, n);
    if (!r) {
      fixed_zero[static_cast<std::size_t>(n)] = 1;
      continue;
    }
    fixed_v[static_cast<std::size_t>(n)] = 1 / r->value;
    fixed_rel[static_cast<std::size_t>(n)] = r->rel_err;
  }

  for (std::uint64_t s = 0; s < samples; ++s) {
    GallagherSample g;
    g.id = s;
    std::uint64_t lo = rng(), hi = rng();
    u128 a = (static_cast<u128>(hi) << 64) | lo;
    g.alpha_bits = u128_to_mpz(a);
    std::uint64_t hits = 0;
    long double runmin = std::numeric_limits<long double>::infinity();
    std::size_t next = 0;
    for (std::int64_t n = 1; n <= N; ++n) {
      if (n >= 3) {
        const auto un = static_cast<std::size_t>(n);
        u128 dk = torus_dist(static_cast<u128>(n) * a);  // exact: alpha_k is dyadic
        long double prod;
        if (fixed_zero[un] || dk == 0) {
          prod = 0;
        } else {
          prod = fixed_v[un] * u128_to_unit(dk);
        }
        long double ps = psi_v[un];
        bool hit;
        long double tol = (fixed_rel[un] + 8 * LDBL_EPSILON) * prod + 8 * LDBL_EPSILON * ps;
        if (prod < ps - tol) hit = true;
        else if (prod > ps + tol) hit = false;
        else {
          // Exact product against an MPFR enclosure of psi(n).
          ++g.undecided;
          mpq_class plo = 1, phi_ = 1;
          for (const auto& f : forms) {
            auto [l, h] = f.dist_enclosure(n);
            plo *= l;
            phi_ *= h;
          }
          mpq_class qk(u128_to_mpz(dk), detail::pow2(128));
          plo *= qk;
          phi_ *= qk;
          auto [slo, shi] = psi.enclosure(n, 256);
          if (phi_ < slo) hit = true;
          else if (plo >= shi) hit = false;
          else throw PrecisionExhausted("Gallagher comparison undecided at n=" + std::to_string(n));
        }
        if (hit) {
          ++hits;
          if (!g.first_witness) g.first_witness = n;
        }
        runmin = std::min(runmin, scale_v[un] * prod);
      }
      while (next < checkpoints.size() && checkpoints[next] == n) {
        g.hits.push_back(hits);
        g.runmin.push_back(runmin);
        ++next;
      }
    }
    rep.samples.push_back(std::move(g));
  }
  std::uint64_t any = 0;
  for (const auto& g : rep.samples) any += g.hits.back() > 0;
  rep.hit_fraction = static_cast<long double>(any) / static_cast<long double>(samples);
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    std::vector<long double> v;
    for (const auto& g : rep.samples) v.push_back(static_cast<long double>(g.hits[c]));
    rep.median_hits.push_back(detail::median(v));
  }
  return rep;
}

inline std::string alpha_k_decimal(const mpz_class& bits, unsigned digits = 12) {
  return q_decimal(mpq_class(bits, detail::pow2(128)), digits);
}

inline void write_experiment_csv(std::ostream& os, const GallagherReport& r) {
  os << "sample_id,alpha_k,hits,first_witness,runmin\n";
  for (const auto& g : r.samples) {
    os << g.id << ',' << alpha_k_decimal(g.alpha_bits) << ',' << g.hits.back() << ','
       << (g.first_witness ? std::to_string(*g.first_witness) : "") << ',' << ld_decimal(g.runmin.back()) << '\n';
  }
}

inline nlohmann::json to_json(const GallagherReport& r) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["generator"] = r.generator;
  j["N"] = r.N;
  j["n_start"] = r.n_start;
  j["samples"] = r.samples.size();
  j["checkpoints"] = r.checkpoints;
  j["hit_fraction"] = ld_decimal(r.hit_fraction);
  nlohmann::json med = nlohmann::json::array();
  for (auto m : r.median_hits) med.push_back(ld_decimal(m, 1));
  j["median_hits"] = med;
  std::uint64_t undecided = 0;
  for (const auto& g : r.samples) undecided += g.undecided;
  j["exact_fallbacks"] = undecided;
  return j;
}

}  // namespace bohrgap
