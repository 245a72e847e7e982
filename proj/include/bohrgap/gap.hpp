#pragma once

// Generalised arithmetic progressions inside and around Bohr sets.
//
//   P+(b; A; N) = { b + sum n_i A_i : 1 <= n_i <= N_i }
//   P (b; A; N) = { b + sum n_i A_i : |n_i| <= N_i }
//
// inner_gap builds a proper P+ inside B from the reduced minima of the lifted
// body; outer_gap builds a symmetric P' around the homogeneous set. Every
// claimed property is verified on the enumerated sets.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bohrgap/bohr.hpp"
#include "bohrgap/errors.hpp"
#include "bohrgap/lattice.hpp"
#include "bohrgap/minima.hpp"
#include "bohrgap/thresholds.hpp"

namespace bohrgap {

inline constexpr std::uint64_t kDefaultBudget = 100'000'000;

enum class GapForm { positive, symmetric };

enum class GapStatus {
  ok,
  no_base_point,
  small_dirichlet_witness,
  length_underflow,
  minima_degenerate,
  base_out_of_band,
};

inline std::string to_string(GapStatus s) {
  switch (s) {
    case GapStatus::ok: return "ok";
    case GapStatus::no_base_point: return "NoBasePoint";
    case GapStatus::small_dirichlet_witness: return "SmallDirichletWitness";
    case GapStatus::length_underflow: return "LengthUnderflow";
    case GapStatus::minima_degenerate: return "MinimaDegenerate";
    case GapStatus::base_out_of_band: return "BaseOutOfBand";
  }
  return "unknown";
}

struct ProperCertificate {
  bool proper = false;
  std::uint64_t count = 0;
  std::uint64_t hash = 0;  // FNV-1a of the sorted values
  std::optional<std::pair<IVec, IVec>> collision;
};

struct GAP {
  GapForm form = GapForm::positive;
  std::int64_t base = 0;
  IVec moduli;
  IVec lengths;
  std::vector<int> sigma;  // sgn(pi_1(v_i))
  std::optional<ProperCertificate> proper;

  std::size_t rank() const { return moduli.size(); }
  std::int64_t lo_coef(std::size_t i) const { return form == GapForm::positive ? 1 : -lengths[i]; }

  // Number of coefficient tuples.
  mpz_class box_size() const {
    mpz_class s = 1;
    for (auto l : lengths) s *= form == GapForm::positive ? mpz_class(static_cast<long>(l)) : mpz_class(static_cast<long>(2 * l + 1));
    return s;
  }
};

namespace detail {

inline void check_budget(const GAP& g, std::uint64_t budget) {
  if (g.box_size() > mpz_class(static_cast<unsigned long>(budget)))
    throw BudgetExceeded("GAP has " + g.box_size().get_str() + " coefficient tuples, above budget " +
                         std::to_string(budget));
}

// Visits (value, coefficients) over the coefficient box.
template <typename Visit>
void for_each_coef(const GAP& g, Visit&& visit) {
  const std::size_t k = g.rank();
  IVec c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = g.lo_coef(i);
  if (k == 0) return;
  for (std::size_t i = 0; i < k; ++i)
    if (g.lengths[i] < (g.form == GapForm::positive ? 1 : 0)) return;
  while (true) {
    std::int64_t v = g.base;
    for (std::size_t i = 0; i < k; ++i) v += c[i] * g.moduli[i];
    visit(v, c);
    std::size_t i = 0;
    while (i < k && ++c[i] > g.lengths[i]) {
      c[i] = g.lo_coef(i);
      ++i;
    }
    if (i == k) break;
  }
}

inline std::uint64_t fnv1a(const std::vector<std::int64_t>& v) {
  std::uint64_t h = 1469598103934665603ULL;
  for (auto x : v) {
    auto u = static_cast<std::uint64_t>(x);
    for (int b = 0; b < 8; ++b) {
      h ^= (u >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace detail

struct GapElement {
  std::int64_t value;
  std::uint32_t multiplicity;
};

inline std::vector<GapElement> gap_elements(const GAP& g, std::uint64_t budget = kDefaultBudget) {
  detail::check_budget(g, budget);
  std::vector<std::int64_t> vals;
  detail::for_each_coef(g, [&](std::int64_t v, const IVec&) { vals.push_back(v); });
  std::sort(vals.begin(), vals.end());
  std::vector<GapElement> out;
  for (auto v : vals) {
    if (!out.empty() && out.back().value == v) ++out.back().multiplicity;
    else out.push_back({v, 1});
  }
  return out;
}

inline ProperCertificate is_proper(const GAP& g, std::uint64_t budget = kDefaultBudget) {
  detail::check_budget(g, budget);
  std::vector<std::int64_t> vals;
  detail::for_each_coef(g, [&](std::int64_t v, const IVec&) { vals.push_back(v); });
  std::sort(vals.begin(), vals.end());
  ProperCertificate cert;
  cert.count = vals.size();
  cert.hash = detail::fnv1a(vals);
  auto dup = std::adjacent_find(vals.begin(), vals.end());
  cert.proper = dup == vals.end();
  if (!cert.proper) {
    std::int64_t target = *dup;
    std::vector<IVec> hits;
    detail::for_each_coef(g, [&](std::int64_t v, const IVec& c) {
      if (v == target && hits.size() < 2) hits.push_back(c);
    });
    cert.collision = std::make_pair(hits[0], hits[1]);
  }
  return cert;
}

// Coefficients of `point` over the rows of a unimodular basis.
inline IVec decompose(const IMat& basis, const IVec& point) {
  ZMat inv = lat::unimodular_inverse(basis);
  const std::size_t k = basis.size();
  IVec c(k);
  for (std::size_t i = 0; i < k; ++i) {
    mpz_class s = 0;
    for (std::size_t t = 0; t < k; ++t) s += mpz_class(static_cast<long>(point[t])) * inv[t][i];
    if (!s.fits_slong_p()) throw GuardViolation("coefficient outside 64-bit range");
    c[i] = s.get_si();
  }
  return c;
}

inline IVec decompose(const MinimaResult& m, const IVec& point) { return decompose(m.basis, point); }

// ---------------------------------------------------------------------------
// Inner structure

struct InnerResult {
  GapStatus status = GapStatus::ok;
  std::string diagnostic;
  std::vector<std::string> trace;
  MinimaResult minima;
  std::optional<GAP> gap;
  bool hypothesis_ok = false;  // N^-eps <= delta_i
  std::int64_t b0 = 0, s = 0;
  mpz_class n_eps_floor;  // ceil(N^eps)
  mpz_class n_sqrt_eps;   // ceil(N^sqrt(eps))
  // verification
  bool contained = false;
  std::uint64_t violations = 0;
  bool proper = false;
  bool gcd_one = false;
  bool moduli_positive = false;
  bool lengths_ok = false;
  bool base_ok = false;
  mpq_class size_ratio;  // prod N_i / (delta product N)

  bool verified() const {
    return status == GapStatus::ok && contained && proper && gcd_one && moduli_positive && lengths_ok && base_ok;
  }
};

namespace detail {

// floor(x) for x >= 0 known within err; takes the lower end when ambiguous.
inline std::int64_t safe_floor(const FixedReal& x) {
  if (x.exact()) return fdiv(x.exact()->get_num(), x.exact()->get_den()).get_si();
  mpz_class lo = fdiv(x.mantissa() - x.err(), pow2(x.scale()));
  return std::max(mpz_class(0), lo).get_si();
}

inline bool all_zero(const std::vector<FixedReal>& v) {
  for (const auto& x : v)
    if (x.mantissa() != 0 || x.err() != 0) return false;
  return true;
}

inline mpq_class q_of(const FixedReal& x) {
  return x.exact() ? *x.exact() : mpq_class(x.mantissa(), pow2(x.scale()));
}

inline std::string fmt_vec(const IVec& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + ")";
}

}  // namespace detail

// delta_i <= 1 is enforced; N^-eps <= delta_i is reported, since every
// property of the output is verified directly.
inline bool check_inner_hypothesis(const BohrSpec& spec) {
  Exponent neg_eps = Exponent::rational(-spec.epsilon);
  bool lower_ok = true;
  for (std::size_t i = 0; i < spec.delta.size(); ++i) {
    mpq_class d = detail::q_of(spec.delta[i]);
    if (d > 1)
      throw ValidationError("inner-structure hypothesis N^-eps <= delta_i <= 1 fails: delta_" + std::to_string(i + 1) +
                            " > 1");
    lower_ok = lower_ok && compare_with_power(d, mpq_class(spec.N), neg_eps) >= 0;
  }
  return lower_ok;
}

inline InnerResult inner_gap(const BohrSpec& spec, std::uint64_t budget = kDefaultBudget) {
  spec.validate();
  InnerResult r;
  r.hypothesis_ok = check_inner_hypothesis(spec);
  const std::size_t k = spec.k();
  ConvexBody body = build_body(spec);
  r.minima = successive_minima(body);
  const MinimaResult& mr = r.minima;
  r.trace.push_back("lambda = " + body.lambda.to_decimal(12) + " (lambda^k = " + body.lambda_pow.get_str() + ")");
  for (std::size_t i = 0; i < k; ++i)
    r.trace.push_back("v_" + std::to_string(i + 1) + " = " + detail::fmt_vec(mr.basis[i]) + ", lambda_" +
                      std::to_string(i + 1) + " = " + mr.lambdas[i].to_decimal(12) + ", basis gauge " +
                      mr.basis_gauges[i].to_decimal(12));

  GAP g;
  g.form = GapForm::positive;
  for (std::size_t i = 0; i < k; ++i) {
    std::int64_t p = mr.basis[i][0];
    g.moduli.push_back(p < 0 ? -p : p);
    g.sigma.push_back(p > 0 ? 1 : p < 0 ? -1 : 0);
  }
  r.trace.push_back("moduli A = " + detail::fmt_vec(g.moduli));
  if (std::any_of(g.moduli.begin(), g.moduli.end(), [](auto a) { return a == 0; })) {
    r.status = GapStatus::minima_degenerate;
    r.diagnostic = "some basis vector has first coordinate 0";
    return r;
  }

  // N_i = floor(lambda / (k g_i)) = floor(1 / (k m_i)), m_i the basis R-gauge.
  const mpq_class Nq(spec.N);
  r.n_eps_floor = ceil_power(Nq, Exponent::rational(spec.epsilon));
  for (std::size_t i = 0; i < k; ++i) {
    FixedReal m = mr.basis_r_gauges[i];
    FixedReal denom = mpz_class(static_cast<unsigned long>(k)) * m;
    g.lengths.push_back(detail::safe_floor(FixedReal::from_int(1, m.scale()) / denom));
  }
  r.trace.push_back("lengths N = " + detail::fmt_vec(g.lengths) + " (need >= N^eps, i.e. >= " +
                    r.n_eps_floor.get_str() + ")");
  for (std::size_t i = 0; i < k; ++i) {
    if (g.lengths[i] < 1 || mpz_class(static_cast<long>(g.lengths[i])) < r.n_eps_floor) {
      r.status = GapStatus::length_underflow;
      r.diagnostic = "N_" + std::to_string(i + 1) + " = " + std::to_string(g.lengths[i]) + " < N^eps";
      r.gap = g;
      return r;
    }
  }

  const std::int64_t M = spec.N / 20;
  auto forms = make_forms(spec.alpha, spec.gamma);
  auto thr20 = detail::thresholds(spec.scaled_delta(mpq_class(1, 20)).delta);
  auto b0 = M >= 1 ? detail::first_member(forms, thr20, 1, M) : std::nullopt;
  if (!b0) {
    r.status = GapStatus::no_base_point;
    r.diagnostic = "no b_0 in [1, " + std::to_string(M) + "] with ||b_0 alpha_i - gamma_i|| <= delta_i/20";
    r.gap = g;
    return r;
  }
  r.b0 = *b0;
  r.trace.push_back("b_0 = " + std::to_string(r.b0));

  auto hforms = make_forms(spec.alpha, zeros(spec.alpha.d(), spec.alpha.alphas.front().scale()));
  std::vector<DistThreshold> dthr(
      spec.alpha.d(), DistThreshold::power(mpq_class(M), Exponent::rational(mpq_class(-1, static_cast<long>(k - 1)))));
  auto s = detail::first_member(hforms, dthr, 1, M);
  r.n_sqrt_eps = ceil_power(Nq, spec.sqrt_eps());
  if (!s) {
    r.status = GapStatus::small_dirichlet_witness;
    r.diagnostic = "no s in [1, " + std::to_string(M) + "] with ||s alpha_i|| <= floor(N/20)^(-1/(k-1))";
    r.gap = g;
    return r;
  }
  r.s = *s;
  r.trace.push_back("s = " + std::to_string(r.s) + " (need >= N^sqrt(eps), i.e. >= " + r.n_sqrt_eps.get_str() + ")");
  if (mpz_class(static_cast<long>(r.s)) < r.n_sqrt_eps) {
    r.status = GapStatus::small_dirichlet_witness;
    r.diagnostic = "smallest Dirichlet witness s = " + std::to_string(r.s) + " is below N^sqrt(eps)";
    r.gap = g;
    return r;
  }
  g.base = r.b0 + r.s;
  r.trace.push_back("b = b_0 + s = " + std::to_string(g.base));

  auto thr10 = detail::thresholds(spec.scaled_delta(mpq_class(1, 10)).delta);
  bool in_band = mpz_class(static_cast<long>(g.base)) >= r.n_sqrt_eps && 10 * g.base <= spec.N;
  bool close = true;
  for (std::size_t i = 0; i < forms.size(); ++i) close = close && dist_within(forms[i], thr10[i], g.base, i);
  r.base_ok = in_band && close;
  if (!r.base_ok) {
    r.status = GapStatus::base_out_of_band;
    r.diagnostic = "b fails N^sqrt(eps) <= b <= N/10 or ||b alpha_i - gamma_i|| <= delta_i/10";
    r.gap = g;
    return r;
  }

  // Verification.
  std::int64_t gg = 0;
  for (auto a : g.moduli) gg = std::gcd(gg, a);
  r.gcd_one = gg == 1;
  r.moduli_positive = std::all_of(g.moduli.begin(), g.moduli.end(), [](auto a) { return a >= 1; });
  r.lengths_ok = true;
  BohrMask mask = bohr_mask(spec, Range::positive);
  r.violations = 0;
  detail::check_budget(g, budget);
  detail::for_each_coef(g, [&](std::int64_t v, const IVec&) {
    if (!mask.test(v)) ++r.violations;
  });
  r.contained = r.violations == 0;
  g.proper = is_proper(g, budget);
  r.proper = g.proper->proper;
  mpz_class card = g.box_size();
  r.size_ratio = mpq_class(card) / (spec.delta_product() * spec.N);
  r.trace.push_back("P subset B: " + std::string(r.contained ? "verified" : "FAILED") + " over " +
                    card.get_str() + " elements");
  r.trace.push_back("proper: " + std::string(r.proper ? "yes" : "no") + ", gcd(A) = " + std::to_string(gg));
  r.gap = g;
  return r;
}

// ---------------------------------------------------------------------------
// Outer structure

struct OuterResult {
  GapStatus status = GapStatus::ok;
  std::string diagnostic;
  bool hypothesis_ok = false;  // N^-sqrt(eps) <= delta_i
  MinimaResult minima;
  GAP gap;
  FixedReal c_k;
  FixedReal iota;  // prod basis gauges / prod minima
  mpz_class n_tau;  // ceil(N^sqrt(eps))
  std::uint64_t lifted_points = 0;
  std::uint64_t violations = 0;
  long double max_coef_ratio = 0;  // max |n_i| / N_i
  bool contained = false;
  mpq_class size_ratio;  // |P'| / (delta product N)
};

namespace detail {

inline std::int64_t to_i64(const mpz_class& z) {
  if (!z.fits_slong_p()) throw GuardViolation("value outside 64-bit range");
  return z.get_si();
}

// All a with |x - a| <= delta where x = n alpha (n >= 0); long double first,
// exact mpz on near ties.
inline void lifts_of(std::int64_t n, const FixedReal& alpha, long double alpha_ld, const mpq_class& delta,
                     long double delta_ld, std::vector<std::int64_t>& out) {
  out.clear();
  long double x = alpha_ld * static_cast<long double>(n);
  auto lo = static_cast<std::int64_t>(std::floor(x - delta_ld)) - 1;
  auto hi = static_cast<std::int64_t>(std::ceil(x + delta_ld)) + 1;
  for (std::int64_t a = lo; a <= hi; ++a) {
    long double t = std::fabs(x - static_cast<long double>(a)) - delta_ld;
    if (t < -1e-9L) {
      out.push_back(a);
    } else if (t <= 1e-9L) {
      FixedReal diff = (mpz_class(static_cast<long>(n)) * alpha - FixedReal::from_int(a, alpha.scale())).abs_value();
      if (diff.exact()) {
        if (*diff.exact() <= delta) out.push_back(a);
      } else {
        if (diff.upper() <= delta) out.push_back(a);
        else if (!(diff.lower() > delta)) throw PrecisionExhausted("lift undecided at n=" + std::to_string(n));
      }
    }
  }
}

}  // namespace detail

// Calls visit(point) for every (n, a) in the lifted homogeneous Bohr set
// { |n| <= N, |n alpha_i - a_i| <= delta_i }.
template <typename Visit>
void for_each_homogeneous_lift(const BohrSpec& spec, Visit&& visit) {
  const std::size_t d = spec.alpha.d();
  std::vector<long double> a_ld(d), d_ld(d);
  std::vector<mpq_class> dq(d);
  for (std::size_t i = 0; i < d; ++i) {
    a_ld[i] = spec.alpha.alphas[i].to_long_double();
    dq[i] = detail::q_of(spec.delta[i]);
    d_ld[i] = Exponent::mpq_to_ld(dq[i]);
  }
  std::vector<std::vector<std::int64_t>> choices(d);
  IVec p(d + 1), q(d + 1);
  for (std::int64_t n = 0; n <= spec.N; ++n) {
    bool empty = false;
    for (std::size_t i = 0; i < d && !empty; ++i) {
      detail::lifts_of(n, spec.alpha.alphas[i], a_ld[i], dq[i], d_ld[i], choices[i]);
      empty = choices[i].empty();
    }
    if (empty) continue;
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      p[0] = n;
      for (std::size_t i = 0; i < d; ++i) p[i + 1] = choices[i][idx[i]];
      visit(p);
      if (n != 0) {
        for (std::size_t t = 0; t <= d; ++t) q[t] = -p[t];
        visit(q);
      }
      std::size_t j = 0;
      while (j < d && ++idx[j] == choices[j].size()) idx[j++] = 0;
      if (j == d) break;
    }
  }
}

// Default outer constant 10 k^(k/2): Hadamard's inequality on the Cramer
// determinants plus prod lambda_i vol(S) <= 2^k.
inline FixedReal default_outer_constant(std::size_t k, unsigned scale = kDefaultScale) {
  mpz_class kk;
  mpz_ui_pow_ui(kk.get_mpz_t(), k, k);
  mpz_class root;
  mpz_sqrt(root.get_mpz_t(), kk.get_mpz_t());
  FixedReal r = root * root == kk ? FixedReal::from_int(root, scale) : FixedReal::sqrt_int(kk.get_ui(), scale);
  return mpz_class(10) * r;
}

inline bool check_outer_hypothesis(const BohrSpec& spec) {
  if (!detail::all_zero(spec.gamma)) throw ValidationError("outer structure needs gamma = 0");
  Exponent neg_tau = spec.sqrt_eps().negated();
  bool lower_ok = true;
  for (std::size_t i = 0; i < spec.delta.size(); ++i) {
    mpq_class d = detail::q_of(spec.delta[i]);
    if (d > 2)
      throw ValidationError("outer-structure hypothesis N^-sqrt(eps) <= delta_i <= 2 fails: delta_" +
                            std::to_string(i + 1) + " > 2");
    lower_ok = lower_ok && compare_with_power(d, mpq_class(spec.N), neg_tau) >= 0;
  }
  return lower_ok;
}

inline OuterResult outer_gap(const BohrSpec& spec, std::optional<FixedReal> c_k = std::nullopt) {
  spec.validate();
  OuterResult r;
  r.hypothesis_ok = check_outer_hypothesis(spec);
  const std::size_t k = spec.k();
  r.minima = successive_minima(build_body(spec));
  const MinimaResult& mr = r.minima;
  const unsigned scale = spec.alpha.alphas.front().scale();
  r.c_k = c_k ? *c_k : default_outer_constant(k, scale);
  FixedReal num = FixedReal::from_int(1, scale), den = FixedReal::from_int(1, scale);
  for (std::size_t i = 0; i < k; ++i) {
    num = num * mr.basis_r_gauges[i];
    den = den * mr.r_minima[i];
  }
  r.iota = num / den;
  GAP& g = r.gap;
  g.form = GapForm::symmetric;
  g.base = 0;
  r.n_tau = ceil_power(mpq_class(spec.N), spec.sqrt_eps());
  for (std::size_t i = 0; i < k; ++i) {
    std::int64_t p = mr.basis[i][0];
    g.moduli.push_back(p < 0 ? -p : p);
    g.sigma.push_back(p > 0 ? 1 : p < 0 ? -1 : 0);
    // lambda / lambda_i = 1 / m_i
    g.lengths.push_back(detail::safe_floor(r.c_k * r.iota / mr.r_minima[i]));
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (g.lengths[i] < 1 || mpz_class(static_cast<long>(g.lengths[i])) < r.n_tau) {
      r.status = GapStatus::length_underflow;
      r.diagnostic = "N_" + std::to_string(i + 1) + " = " + std::to_string(g.lengths[i]) + " < N^sqrt(eps)";
    }
  }

  // Containment of every lifted point, via the inverse basis.
  ZMat inv = lat::unimodular_inverse(mr.basis);
  std::vector<std::vector<__int128>> w(k, std::vector<__int128>(k));
  for (std::size_t t = 0; t < k; ++t)
    for (std::size_t i = 0; i < k; ++i) w[t][i] = detail::to_i64(inv[t][i]);
  for_each_homogeneous_lift(spec, [&](const IVec& p) {
    ++r.lifted_points;
    bool ok = true;
    for (std::size_t i = 0; i < k; ++i) {
      __int128 c = 0;
      for (std::size_t t = 0; t < k; ++t) c += static_cast<__int128>(p[t]) * w[t][i];
      __int128 ac = c < 0 ? -c : c;
      long double ratio = static_cast<long double>(ac) / static_cast<long double>(std::max<std::int64_t>(1, g.lengths[i]));
      r.max_coef_ratio = std::max(r.max_coef_ratio, ratio);
      if (ac > g.lengths[i]) ok = false;
    }
    if (!ok) ++r.violations;
  });
  r.contained = r.violations == 0;
  r.size_ratio = mpq_class(g.box_size()) / (spec.delta_product() * spec.N);
  return r;
}

// ---------------------------------------------------------------------------
// Cardinality

struct CardinalityReport {
  std::uint64_t count = 0;  // #B over |n| <= N
  mpq_class ratio;           // count / (delta product N)
  std::int64_t n0 = 0;       // smallest positive member
  std::uint64_t positive_count = 0;
  bool injection_ok = false;            // B cap [1,N] - n0 into B^0(N; 2 delta)
  bool symmetric_injection_ok = false;  // B - n0' into B^0(2N; 2 delta)
};

inline CardinalityReport cardinality_ratio(const BohrSpec& spec) {
  spec.validate();
  CardinalityReport r;
  BohrSet sym = enumerate_bohr(spec, Range::symmetric);
  r.count = sym.size();
  r.ratio = mpq_class(static_cast<unsigned long>(r.count)) / (spec.delta_product() * spec.N);
  BohrSpec h = spec.homogeneous().scaled_delta(2);
  for (auto& d : h.delta)
    if (d.lower() > 2) d = FixedReal::from_int(2, d.scale());
  std::vector<std::int64_t> pos;
  for (auto n : sym.members)
    if (n >= 1) pos.push_back(n);
  r.positive_count = pos.size();
  r.injection_ok = true;
  r.symmetric_injection_ok = true;
  if (!pos.empty()) {
    r.n0 = pos.front();
    BohrMask target = bohr_mask(h, Range::symmetric);
    for (auto n : pos) r.injection_ok = r.injection_ok && target.test(n - r.n0);
  }
  if (!sym.members.empty()) {
    BohrSpec h2 = h;
    h2.N = 2 * spec.N;
    BohrMask target2 = bohr_mask(h2, Range::symmetric);
    std::int64_t m0 = sym.members.front();
    for (auto n : sym.members) r.symmetric_injection_ok = r.symmetric_injection_ok && target2.test(n - m0);
  }
  return r;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const GAP& g) {
  nlohmann::json j;
  j["form"] = g.form == GapForm::positive ? "positive" : "symmetric";
  j["base"] = g.base;
  j["moduli"] = g.moduli;
  j["lengths"] = g.lengths;
  j["sigma"] = g.sigma;
  j["cardinality"] = g.box_size().get_str();
  if (g.proper) {
    j["proper"] = {{"proper", g.proper->proper}, {"count", g.proper->count}, {"hash", g.proper->hash}};
    if (g.proper->collision)
      j["proper"]["collision"] = {g.proper->collision->first, g.proper->collision->second};
  }
  return j;
}

inline nlohmann::json to_json(const InnerResult& r) {
  nlohmann::json j;
  j["status"] = to_string(r.status);
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  j["hypothesis_lower_ok"] = r.hypothesis_ok;
  j["trace"] = r.trace;
  j["minima"] = to_json(r.minima);
  if (r.gap) j["gap"] = to_json(*r.gap);
  j["b0"] = r.b0;
  j["s"] = r.s;
  j["N_eps_ceil"] = r.n_eps_floor.get_str();
  j["N_sqrt_eps_ceil"] = r.n_sqrt_eps.get_str();
  if (r.status == GapStatus::ok) {
    j["verification"] = {{"contained", r.contained},      {"violations", r.violations},
                         {"proper", r.proper},            {"gcd_one", r.gcd_one},
                         {"moduli_positive", r.moduli_positive}, {"lengths_ok", r.lengths_ok},
                         {"base_ok", r.base_ok},          {"size_ratio", q_decimal(r.size_ratio, 12)}};
  }
  return j;
}

inline nlohmann::json to_json(const OuterResult& r) {
  nlohmann::json j;
  j["status"] = to_string(r.status);
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  j["hypothesis_lower_ok"] = r.hypothesis_ok;
  j["minima"] = to_json(r.minima);
  j["gap"] = to_json(r.gap);
  j["C_k"] = r.c_k.to_decimal(12);
  j["iota"] = r.iota.to_decimal(12);
  j["N_sqrt_eps_ceil"] = r.n_tau.get_str();
  j["verification"] = {{"contained", r.contained},
                       {"lifted_points", r.lifted_points},
                       {"violations", r.violations},
                       {"max_coef_ratio", q_decimal(mpq_class(static_cast<double>(r.max_coef_ratio)), 9)},
                       {"size_ratio", q_decimal(r.size_ratio, 12)}};
  return j;
}

inline nlohmann::json to_json(const CardinalityReport& r) {
  return {{"count", r.count},
          {"ratio", q_decimal(r.ratio, 12)},
          {"n0", r.n0},
          {"positive_count", r.positive_count},
          {"injection_ok", r.injection_ok},
          {"symmetric_injection_ok", r.symmetric_injection_ok}};
}

}  // namespace bohrgap
