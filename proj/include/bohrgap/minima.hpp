#pragma once

// The body S = lambda^-1 R where
//
//     R = { x in R^k : |L_j(x)| <= c_j },  L_0(x) = x_1,  L_i(x) = alpha_i x_1 - x_{1+i},
//     c_0 = N/10,  c_i = delta_i/10,  lambda^k = delta_1 ... delta_{k-1} N,
//
// its gauge, and certified successive minima with a unimodular basis.
// Internally everything is measured in the R-gauge m(v) = max_j |L_j(v)|/c_j;
// the S-gauge is lambda * m(v), and lambda cancels from every comparison.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "bohrgap/bohr.hpp"
#include "bohrgap/errors.hpp"
#include "bohrgap/lattice.hpp"
#include "bohrgap/realfield.hpp"

namespace bohrgap {

struct ConvexBody {
  std::size_t k = 0;
  std::vector<std::vector<FixedReal>> forms;  // k x k, rows L_j
  std::vector<mpq_class> bounds;              // c_j > 0
  FixedReal lambda;                           // working-precision lambda
  mpq_class lambda_pow = 1;                   // lambda^k, exact
  mpq_class form_det = 1;                     // |det forms|, exact

  // vol(S) = 2^k prod c_j / (|det| lambda^k), exact.
  mpq_class volume() const {
    mpq_class v = 1;
    for (const auto& c : bounds) v *= 2 * c;
    return v / (form_det * lambda_pow);
  }
};

namespace detail {

// x * (p/q) with q > 0, rounded once.
inline FixedReal scale_by(const FixedReal& x, const mpq_class& f) {
  mpz_class p = f.get_num(), q = f.get_den();
  mpz_class num = x.mantissa() * p;
  mpz_class m = rdiv(num, q);
  mpz_class e = cdiv(x.err() * abs(p), q) + ((m * q == num) ? 0 : 1);
  std::optional<mpq_class> ex;
  if (x.exact()) ex = *x.exact() * f;
  return FixedReal(std::move(m), x.scale(), std::move(e), std::move(ex));
}

// max(a, b) as an enclosure; exact when the comparison is certified.
inline FixedReal fr_max(const FixedReal& a, const FixedReal& b) {
  try {
    return compare(a, b) == std::strong_ordering::less ? b : a;
  } catch (const PrecisionExhausted&) {
    unsigned s = std::max(a.scale(), b.scale());
    FixedReal x = a.rescaled(s), y = b.rescaled(s);
    mpz_class lo = std::max(mpz_class(x.mantissa() - x.err()), mpz_class(y.mantissa() - y.err()));
    mpz_class hi = std::max(mpz_class(x.mantissa() + x.err()), mpz_class(y.mantissa() + y.err()));
    mpz_class mid = fdiv(lo + hi, 2);
    return FixedReal(mid, s, hi - mid);
  }
}

}  // namespace detail

inline ConvexBody identity_body(std::size_t k, unsigned scale = kDefaultScale) {
  ConvexBody b;
  b.k = k;
  b.forms.assign(k, std::vector<FixedReal>(k, FixedReal::from_int(0, scale)));
  for (std::size_t i = 0; i < k; ++i) b.forms[i][i] = FixedReal::from_int(1, scale);
  b.bounds.assign(k, mpq_class(1));
  b.lambda = FixedReal::from_int(1, scale);
  return b;
}

inline ConvexBody build_body(const BohrSpec& spec) {
  spec.validate();
  const std::size_t k = spec.k();
  const unsigned scale = spec.alpha.alphas.front().scale();
  ConvexBody b;
  b.k = k;
  b.forms.assign(k, std::vector<FixedReal>(k, FixedReal::from_int(0, scale)));
  b.forms[0][0] = FixedReal::from_int(1, scale);
  for (std::size_t i = 1; i < k; ++i) {
    b.forms[i][0] = spec.alpha.alphas[i - 1];
    b.forms[i][i] = FixedReal::from_int(-1, scale);
  }
  b.bounds.push_back(mpq_class(spec.N, 10));
  for (const auto& d : spec.delta) {
    mpq_class dq = d.exact() ? *d.exact() : mpq_class(d.mantissa(), detail::pow2(d.scale()));
    b.bounds.push_back(dq / 10);
  }
  for (auto& c : b.bounds) c.canonicalize();
  b.lambda_pow = spec.delta_product() * spec.N;
  b.lambda = FixedReal::kth_root(b.lambda_pow, static_cast<unsigned>(k), scale);
  return b;
}

// m(v) = max_j |L_j(v)| / c_j.
inline FixedReal r_gauge(const ConvexBody& body, const IVec& v) {
  std::optional<FixedReal> best;
  for (std::size_t j = 0; j < body.k; ++j) {
    FixedReal acc = FixedReal::from_int(0, body.forms[j].front().scale());
    for (std::size_t l = 0; l < body.k; ++l)
      if (v[l] != 0) acc = acc + mpz_class(static_cast<long>(v[l])) * body.forms[j][l];
    FixedReal q = detail::scale_by(acc.abs_value(), 1 / body.bounds[j]);
    best = best ? detail::fr_max(*best, q) : q;
  }
  return *best;
}

// g_S(v) = lambda * m(v).
inline FixedReal gauge(const ConvexBody& body, const IVec& v) {
  bool zero = std::all_of(v.begin(), v.end(), [](auto x) { return x == 0; });
  if (zero) throw ValidationError("gauge of the zero vector");
  return body.lambda * r_gauge(body, v);
}

struct MinimaResult {
  std::size_t k = 0;
  std::vector<FixedReal> r_minima;  // m-values of the minima
  std::vector<FixedReal> lambdas;   // lambda * m
  IMat minima_vectors;
  IMat basis;
  std::vector<FixedReal> basis_r_gauges;
  std::vector<FixedReal> basis_gauges;
  int det_sign = 1;
  std::uint64_t enumerated = 0;
  mpq_class volume;
  // Enclosure of prod lambda_i * vol(S).
  mpq_class band_lo, band_hi;
  bool minkowski_ok = false;
};

namespace detail {

inline long double approx_r_gauge(const ConvexBody& body, const RMat& fl, const std::vector<long double>& inv_c,
                                  const IVec& v) {
  long double best = 0;
  for (std::size_t j = 0; j < body.k; ++j) {
    long double s = 0;
    for (std::size_t l = 0; l < body.k; ++l) s += fl[j][l] * static_cast<long double>(v[l]);
    best = std::max(best, std::fabs(s) * inv_c[j]);
  }
  return best;
}

struct Candidate {
  long double approx = 0;
  FixedReal m;
  IVec v;
  bool exact = false;
};

inline bool candidate_less(const Candidate& a, const Candidate& b) {
  int c;
  if (a.m.scale() == b.m.scale()) {
    c = cmp(a.m.mantissa(), b.m.mantissa());
  } else {
    unsigned s = std::max(a.m.scale(), b.m.scale());
    c = cmp(a.m.rescaled(s).mantissa(), b.m.rescaled(s).mantissa());
  }
  if (c != 0) return c < 0;
  return a.v < b.v;
}

inline std::uint64_t factorial(std::size_t k) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace detail

// Exact successive minima by reduce-then-enumerate, plus a greedy unimodular
// basis v_i of minimal gauge extending v_1..v_{i-1}.
inline MinimaResult successive_minima(const ConvexBody& body, std::uint64_t budget = 20'000'000) {
  const std::size_t k = body.k;
  if (k < 1 || k > 6) throw GuardViolation("successive_minima supports 1 <= k <= 6");
  RMat fl(k, std::vector<long double>(k));
  std::vector<long double> inv_c(k);
  for (std::size_t j = 0; j < k; ++j) {
    inv_c[j] = 1.0L / Exponent::mpq_to_ld(body.bounds[j]);
    for (std::size_t l = 0; l < k; ++l) fl[j][l] = body.forms[j][l].to_long_double();
  }
  // Generators: the images of e_l under diag(1/c) F.
  RMat b(k, std::vector<long double>(k));
  for (std::size_t l = 0; l < k; ++l)
    for (std::size_t j = 0; j < k; ++j) b[l][j] = fl[j][l] * inv_c[j];
  IMat u(k, IVec(k, 0));
  for (std::size_t i = 0; i < k; ++i) u[i][i] = 1;
  lat::lll(b, u);

  long double radius = 0;
  for (const auto& row : u) radius = std::max(radius, detail::approx_r_gauge(body, fl, inv_c, row));

  MinimaResult res;
  res.k = k;
  for (int attempt = 0; attempt < 8; ++attempt, radius *= 2) {
    const long double cut = radius * (1.0L + 1e-9L);
    std::vector<detail::Candidate> cand;
    std::uint64_t visited = 0;
    lat::enumerate_ball(b, static_cast<long double>(k) * cut * cut, budget, [&](const IVec& y) {
      ++visited;
      IVec v = lat::combine(u, y);
      if (!lat::canonical_sign(v)) return;
      // g w with g > 1 comes after w and cannot be chosen.
      std::int64_t content = 0;
      for (auto x : v) content = std::gcd(content, x);
      if (content != 1) return;
      long double g = detail::approx_r_gauge(body, fl, inv_c, v);
      if (g > cut) return;
      cand.push_back({g, FixedReal(), std::move(v), false});
    });
    res.enumerated += visited;
    std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
      return x.approx != y.approx ? x.approx < y.approx : x.v < y.v;
    });

    // Greedy choice over a prefix; returns the largest index used, or -1.
    auto select = [&](std::size_t end) -> long {
      res.r_minima.clear();
      res.minima_vectors.clear();
      res.basis.clear();
      res.basis_r_gauges.clear();
      long last = -1;
      for (std::size_t i = 0; i < end && res.minima_vectors.size() < k; ++i) {
        IMat trial = res.minima_vectors;
        trial.push_back(cand[i].v);
        if (lat::rank(trial) == trial.size()) {
          res.minima_vectors.push_back(cand[i].v);
          res.r_minima.push_back(cand[i].m);
          last = std::max(last, static_cast<long>(i));
        }
      }
      if (res.minima_vectors.size() < k) return -1;
      for (std::size_t j = 0; j < k; ++j) {
        bool found = false;
        for (std::size_t i = 0; i < end && !found; ++i) {
          IMat trial = res.basis;
          trial.push_back(cand[i].v);
          if (lat::minors_gcd(trial) == 1) {
            res.basis.push_back(cand[i].v);
            res.basis_r_gauges.push_back(cand[i].m);
            last = std::max(last, static_cast<long>(i));
            found = true;
          }
        }
        if (!found) return -1;
      }
      return last;
    };

    // Choose on long-double gauges, then redo exactly on the window that
    // could reorder against the chosen vectors.
    long last = select(cand.size());
    if (last < 0) continue;
    const long double top = cand[static_cast<std::size_t>(last)].approx;
    const long double tol = 1e-6L * top + 1e-9L;
    std::size_t window = static_cast<std::size_t>(last) + 1;
    while (window < cand.size() && cand[window].approx <= top + tol) ++window;
    // Vectors past the window have gauge above top + tol / 2, so a choice
    // whose gauges stay below that is final.
    const mpq_class bound = mpq_class(static_cast<double>(top + tol / 2));
    for (std::size_t pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < window; ++i)
        if (!cand[i].exact) {
          cand[i].m = r_gauge(body, cand[i].v);
          cand[i].exact = true;
        }
      std::sort(cand.begin(), cand.begin() + static_cast<long>(window), detail::candidate_less);
      if (select(window) >= 0) {
        bool settled = window == cand.size();
        if (!settled) {
          settled = true;
          for (const auto& m : res.r_minima) settled = settled && m.upper() < bound;
          for (const auto& m : res.basis_r_gauges) settled = settled && m.upper() < bound;
        }
        if (settled) break;
      }
      window = cand.size();
    }
    if (res.basis.size() == k) break;
  }
  if (res.basis.size() != k) throw BudgetExceeded("could not complete a unimodular basis within the search radius");

  mpz_class d = lat::det(res.basis);
  if (abs(d) != 1) throw GuardViolation("basis is not unimodular");
  res.det_sign = d > 0 ? 1 : -1;
  for (const auto& m : res.r_minima) res.lambdas.push_back(body.lambda * m);
  for (const auto& m : res.basis_r_gauges) res.basis_gauges.push_back(body.lambda * m);

  // prod lambda_i vol(S) = prod m_i * 2^k prod c / |det|.
  res.volume = body.volume();
  mpq_class lo = 1, hi = 1;
  for (const auto& m : res.r_minima) {
    lo *= m.exact() ? *m.exact() : std::max(mpq_class(0), m.lower());
    hi *= m.exact() ? *m.exact() : m.upper();
  }
  mpq_class f = body.lambda_pow * res.volume;
  res.band_lo = lo * f;
  res.band_hi = hi * f;
  mpq_class two_k = mpq_class(detail::pow2(static_cast<unsigned>(k)));
  res.minkowski_ok = res.band_lo >= two_k / mpq_class(static_cast<unsigned long>(detail::factorial(k))) &&
                     res.band_hi <= two_k;
  return res;
}

inline std::string q_decimal(const mpq_class& q, unsigned digits) {
  mpz_class s = detail::rdiv(q.get_num() * detail::pow10(digits), q.get_den());
  return FixedReal::format_scaled(s, digits);
}

inline nlohmann::json to_json(const MinimaResult& r) {
  nlohmann::json j;
  j["k"] = r.k;
  for (const auto& l : r.lambdas) j["lambdas"].push_back(l.to_decimal(20));
  for (const auto& l : r.r_minima) j["r_minima"].push_back(l.to_decimal(20));
  j["minima_vectors"] = r.minima_vectors;
  j["basis"] = r.basis;
  for (const auto& l : r.basis_gauges) j["basis_gauges"].push_back(l.to_decimal(20));
  j["det_sign"] = r.det_sign;
  j["volume"] = r.volume.get_str();
  j["minkowski"] = {{"product_vol_lower", q_decimal(r.band_lo, 12)},
                    {"product_vol_upper", q_decimal(r.band_hi, 12)},
                    {"holds", r.minkowski_ok}};
  j["enumerated"] = r.enumerated;
  return j;
}

}  // namespace bohrgap
