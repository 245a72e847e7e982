#pragma once

// Inhomogeneous Bohr sets
//
//     B = { n : |n| <= N, ||n alpha_i - gamma_i|| <= delta_i for all i }
//
// their lifts to Z^k, the homogeneous lifted body used by the minima module,
// and the restriction to [N^sqrt(eps), N].

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "bohrgap/errors.hpp"
#include "bohrgap/realfield.hpp"
#include "bohrgap/thresholds.hpp"
#include "bohrgap/torus.hpp"

namespace bohrgap {

struct BohrSpec {
  TargetVector alpha;
  std::vector<FixedReal> gamma;
  std::int64_t N = 0;
  std::vector<FixedReal> delta;
  mpq_class epsilon = mpq_class(1, 20);

  std::size_t k() const { return alpha.k(); }

  void validate() const {
    alpha.validate();
    if (gamma.size() != alpha.d()) throw ValidationError("gamma must have k-1 entries");
    if (delta.size() != alpha.d()) throw ValidationError("delta must have k-1 entries");
    if (N < 1) throw ValidationError("N must be positive");
    if (N > 2'000'000'000LL) throw GuardViolation("N above 2e9 is outside the scan range");
    if (epsilon <= 0 || epsilon > mpq_class(1, 4)) throw ValidationError("epsilon must lie in (0, 1/4]");
    for (const auto& d : delta) {
      if (d.upper() <= 0) throw ValidationError("delta_i must be positive");
      if (d.lower() > 2) throw ValidationError("delta_i must not exceed 2");
    }
    // (N+1) * (scan error) must stay far below the smallest delta.
    mpq_class min_delta = delta.front().lower();
    for (const auto& d : delta) min_delta = std::min(min_delta, d.lower());
    mpz_class worst_err = 1;
    for (std::size_t i = 0; i < alpha.d(); ++i) {
      Frac128 a = to_frac128(alpha.alphas[i]), g = to_frac128(gamma[i]);
      worst_err = std::max(worst_err, mpz_class(u128_to_mpz(a.err) + u128_to_mpz(g.err) + 1));
    }
    mpq_class scan_err(mpz_class(N + 1) * worst_err, detail::pow2(128));
    if (!(scan_err * detail::pow2(20) < min_delta))
      throw ValidationError("precision guard: (N+1) * 2^-scale is not below min delta / 2^20");
  }

  // Exact product delta_1 ... delta_{k-1} (the rational behind each delta).
  mpq_class delta_product() const {
    mpq_class p = 1;
    for (const auto& d : delta) p *= d.exact() ? *d.exact() : mpq_class(d.mantissa(), detail::pow2(d.scale()));
    return p;
  }

  Exponent sqrt_eps() const { return Exponent::sqrt_of(epsilon); }

  // Copy with each delta multiplied by a rational factor.
  BohrSpec scaled_delta(const mpq_class& factor) const {
    BohrSpec s = *this;
    for (auto& d : s.delta) {
      mpq_class v = (d.exact() ? *d.exact() : mpq_class(d.mantissa(), detail::pow2(d.scale()))) * factor;
      d = FixedReal::from_rational(v, d.scale());
    }
    return s;
  }

  BohrSpec homogeneous() const {
    BohrSpec s = *this;
    s.gamma = zeros(alpha.d(), alpha.alphas.front().scale());
    return s;
  }
};

enum class Range { symmetric, positive };

struct BohrSet {
  Range range = Range::symmetric;
  std::int64_t N = 0;
  std::vector<std::int64_t> members;
  // Per member: (n, a_1, ..., a_{k-1}); empty until lifted.
  std::vector<std::vector<std::int64_t>> lifted;

  std::size_t size() const { return members.size(); }
  bool contains(std::int64_t n) const { return std::binary_search(members.begin(), members.end(), n); }
};

// Dense membership over the range: index n + N (symmetric) or n - 1 (positive).
class BohrMask {
 public:
  BohrMask(Range range, std::int64_t N) : range_(range), N_(N) {
    bits_.assign(range == Range::symmetric ? static_cast<std::size_t>(2 * N + 1) : static_cast<std::size_t>(N), 0);
  }
  std::int64_t lo() const { return range_ == Range::symmetric ? -N_ : 1; }
  std::int64_t hi() const { return N_; }
  bool in_range(std::int64_t n) const { return n >= lo() && n <= hi(); }
  bool test(std::int64_t n) const { return in_range(n) && bits_[static_cast<std::size_t>(n - lo())] != 0; }
  void set(std::int64_t n) { bits_[static_cast<std::size_t>(n - lo())] = 1; }
  Range range() const { return range_; }
  std::int64_t N() const { return N_; }

 private:
  Range range_;
  std::int64_t N_;
  std::vector<std::uint8_t> bits_;
};

namespace detail {

// Visits every n in [lo, hi] with ||n alpha_i - gamma_i|| <= delta_i for all i.
// A visitor returning bool stops the scan by returning false.
template <typename Visit>
void scan_bohr(const std::vector<TorusForm>& forms, const std::vector<DistThreshold>& thr, std::int64_t lo,
               std::int64_t hi, Visit&& visit) {
  const std::size_t d = forms.size();
  std::vector<u128> phase(d);
  for (std::size_t i = 0; i < d; ++i) phase[i] = forms[i].phase(lo);
  for (std::int64_t n = lo; n <= hi; ++n) {
    const std::uint64_t an = static_cast<std::uint64_t>(n < 0 ? -n : n);
    bool member = true;
    for (std::size_t i = 0; i < d && member; ++i) {
      if (thr[i].always()) continue;
      u128 dist = torus_dist(phase[i]);
      switch (thr[i].le(dist, forms[i].err(an))) {
        case DistThreshold::Decision::yes: break;
        case DistThreshold::Decision::no: member = false; break;
        case DistThreshold::Decision::undecided: member = dist_within(forms[i], thr[i], n, i); break;
      }
    }
    if (member) {
      if constexpr (std::is_same_v<decltype(visit(n)), bool>) {
        if (!visit(n)) return;
      } else {
        visit(n);
      }
    }
    for (std::size_t i = 0; i < d; ++i) phase[i] += forms[i].step();
  }
}

// First member in [lo, hi], if any.
inline std::optional<std::int64_t> first_member(const std::vector<TorusForm>& forms,
                                                const std::vector<DistThreshold>& thr, std::int64_t lo,
                                                std::int64_t hi) {
  std::optional<std::int64_t> found;
  scan_bohr(forms, thr, lo, hi, [&](std::int64_t n) {
    found = n;
    return false;
  });
  return found;
}

inline std::vector<DistThreshold> thresholds(const std::vector<FixedReal>& delta) {
  std::vector<DistThreshold> t;
  for (const auto& d : delta) t.emplace_back(d);
  return t;
}

}  // namespace detail

inline BohrMask bohr_mask(const BohrSpec& spec, Range range) {
  spec.validate();
  BohrMask mask(range, spec.N);
  auto forms = make_forms(spec.alpha, spec.gamma);
  auto thr = detail::thresholds(spec.delta);
  detail::scan_bohr(forms, thr, mask.lo(), mask.hi(), [&](std::int64_t n) { mask.set(n); });
  return mask;
}

inline BohrSet enumerate_bohr(const BohrSpec& spec, Range range) {
  spec.validate();
  BohrSet out;
  out.range = range;
  out.N = spec.N;
  auto forms = make_forms(spec.alpha, spec.gamma);
  auto thr = detail::thresholds(spec.delta);
  std::int64_t lo = range == Range::symmetric ? -spec.N : 1;
  detail::scan_bohr(forms, thr, lo, spec.N, [&](std::int64_t n) { out.members.push_back(n); });
  return out;
}

// Attaches the nearest-integer witnesses a_i. Requires every delta_i < 1/2 so
// that the witness is unique.
inline BohrSet lift_bohr(const BohrSpec& spec, BohrSet set) {
  for (const auto& d : spec.delta)
    if (!(d.upper() < mpq_class(1, 2)))
      throw ValidationError("lift_bohr needs delta_i < 1/2 for unique witnesses; use all_lifts instead");
  set.lifted.clear();
  set.lifted.reserve(set.members.size());
  for (std::int64_t n : set.members) {
    std::vector<std::int64_t> v{n};
    for (std::size_t i = 0; i < spec.alpha.d(); ++i) {
      mpz_class a = nearest_int(mpz_class(static_cast<long>(n)) * spec.alpha.alphas[i] - spec.gamma[i]);
      v.push_back(a.get_si());
    }
    set.lifted.push_back(std::move(v));
  }
  return set;
}

// Every integer a with |x - a| <= delta, x = n alpha - gamma (several when
// delta >= 1/2).
inline std::vector<std::int64_t> all_lifts(const FixedReal& x, const FixedReal& delta) {
  mpz_class one = detail::pow2(x.scale());
  mpz_class lo = detail::fdiv(x.mantissa() - x.err() - (delta.mantissa() + delta.err()) * (one / detail::pow2(delta.scale() > x.scale() ? 0 : x.scale() - delta.scale())), one) - 1;
  std::vector<std::int64_t> out;
  mpz_class hi_bound = detail::cdiv(x.mantissa() + x.err(), one) + 3 + detail::cdiv(delta.mantissa() + delta.err(), detail::pow2(delta.scale()));
  for (mpz_class a = lo; a <= hi_bound; ++a) {
    FixedReal diff = (x - FixedReal::from_int(a, x.scale())).abs_value();
    if (certified_le(diff, delta)) out.push_back(a.get_si());
  }
  return out;
}

// The lifted set { (n, a) : |n| <= N, |n alpha_i - gamma_i - a_i| <= delta_i },
// all witnesses included.
inline std::vector<std::vector<std::int64_t>> lifted_all(const BohrSpec& spec, Range range = Range::symmetric) {
  BohrSet base = enumerate_bohr(spec, range);
  std::vector<std::vector<std::int64_t>> out;
  const std::size_t d = spec.alpha.d();
  bool unique = true;
  for (const auto& dl : spec.delta) unique = unique && dl.upper() < mpq_class(1, 2);
  for (std::int64_t n : base.members) {
    std::vector<std::vector<std::int64_t>> choices(d);
    for (std::size_t i = 0; i < d; ++i) {
      FixedReal x = mpz_class(static_cast<long>(n)) * spec.alpha.alphas[i] - spec.gamma[i];
      if (unique) choices[i] = {nearest_int(x).get_si()};
      else choices[i] = all_lifts(x, spec.delta[i]);
    }
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      std::vector<std::int64_t> v{n};
      for (std::size_t i = 0; i < d; ++i) v.push_back(choices[i][idx[i]]);
      out.push_back(std::move(v));
      std::size_t j = 0;
      while (j < d && ++idx[j] == choices[j].size()) idx[j++] = 0;
      if (j == d) break;
    }
  }
  return out;
}

// { (n, a) : |n| <= N/10, |n alpha_i - a_i| <= delta_i / 10 }.
inline BohrSet homogeneous_lifted(const BohrSpec& spec) {
  BohrSpec h = spec.homogeneous().scaled_delta(mpq_class(1, 10));
  h.N = spec.N / 10;  // |n| <= N/10 for integer n is |n| <= floor(N/10)
  if (h.N < 1) {
    BohrSet zero;
    zero.N = 0;
    zero.members = {0};
    zero.lifted = {std::vector<std::int64_t>(spec.k(), 0)};
    return zero;
  }
  BohrSet s = enumerate_bohr(h, Range::symmetric);
  return lift_bohr(h, std::move(s));
}

// Positive members with N^sqrt(eps) <= n <= N.
inline BohrSet restricted_bohr(const BohrSpec& spec) {
  spec.validate();
  mpz_class lo = ceil_power(mpq_class(spec.N), spec.sqrt_eps());
  BohrSet out;
  out.range = Range::positive;
  out.N = spec.N;
  if (lo > spec.N) return out;
  auto forms = make_forms(spec.alpha, spec.gamma);
  auto thr = detail::thresholds(spec.delta);
  detail::scan_bohr(forms, thr, std::max<std::int64_t>(1, lo.get_si()), spec.N,
                    [&](std::int64_t n) { out.members.push_back(n); });
  return out;
}

// CSV: n, a_1..a_{k-1}, dist_1..dist_{k-1} (decimal strings, 20 places).
inline void write_bohr_csv(std::ostream& os, const BohrSpec& spec, const BohrSet& set) {
  const std::size_t d = spec.alpha.d();
  os << "n";
  for (std::size_t i = 1; i <= d; ++i) os << ",a_" << i;
  for (std::size_t i = 1; i <= d; ++i) os << ",dist_" << i;
  os << "\n";
  auto forms = make_forms(spec.alpha, spec.gamma);
  for (std::size_t r = 0; r < set.members.size(); ++r) {
    std::int64_t n = set.members[r];
    os << n;
    for (std::size_t i = 0; i < d; ++i) {
      if (!set.lifted.empty()) {
        os << "," << set.lifted[r][i + 1];
      } else {
        FixedReal x = mpz_class(static_cast<long>(n)) * spec.alpha.alphas[i] - spec.gamma[i];
        os << "," << nearest_int(x).get_str();
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      FixedReal dist(u128_to_mpz(torus_dist(forms[i].phase(n))), 128, 0);
      os << "," << dist.to_decimal(20);
    }
    os << "\n";
  }
}

}  // namespace bohrgap
