#pragma once

// Euler totient tables, divisibility densities alpha_p on progressions,
// congruence lattices, and lattice-point counts in boxes with Davenport's
// discrepancy bound.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bohrgap/errors.hpp"
#include "bohrgap/gap.hpp"
#include "bohrgap/lattice.hpp"
#include "bohrgap/realfield.hpp"
#include "bohrgap/thresholds.hpp"

namespace bohrgap {

inline constexpr std::uint64_t kDenseTotient = 10'000'000;
inline constexpr std::uint64_t kMaxTotient = 100'000'000;

inline std::vector<std::uint32_t> primes_up_to(std::uint32_t n) {
  std::vector<bool> comp(n + 1, false);
  std::vector<std::uint32_t> ps;
  for (std::uint32_t i = 2; i <= n; ++i) {
    if (comp[i]) continue;
    ps.push_back(i);
    for (std::uint64_t j = static_cast<std::uint64_t>(i) * i; j <= n; j += i) comp[j] = true;
  }
  return ps;
}

// phi(1..limit): a dense linear sieve up to 10^7, segmented blocks above.
class TotientTable {
 public:
  TotientTable() = default;
  explicit TotientTable(std::uint64_t limit) : limit_(limit) {
    if (limit < 1) throw ValidationError("totient limit must be >= 1");
    if (limit > kMaxTotient) throw GuardViolation("totient limit above 10^8");
    dense_ = std::min(limit, kDenseTotient);
    phi_.assign(dense_ + 1, 0);
    std::vector<std::uint32_t> primes;
    phi_[1] = 1;
    for (std::uint64_t i = 2; i <= dense_; ++i) {
      if (phi_[i] == 0) {
        phi_[i] = static_cast<std::uint32_t>(i - 1);
        primes.push_back(static_cast<std::uint32_t>(i));
      }
      for (auto p : primes) {
        std::uint64_t m = i * p;
        if (m > dense_) break;
        if (i % p == 0) {
          phi_[m] = phi_[i] * p;
          break;
        }
        phi_[m] = phi_[i] * (p - 1);
      }
    }
    if (limit_ > dense_) base_primes_ = primes_up_to(static_cast<std::uint32_t>(std::sqrt(static_cast<double>(limit_))) + 1);
  }

  std::uint64_t limit() const { return limit_; }
  std::uint64_t dense_limit() const { return dense_; }

  std::uint64_t operator()(std::uint64_t n) const {
    if (n < 1 || n > limit_) throw GuardViolation("totient query " + std::to_string(n) + " outside the table");
    if (n <= dense_) return phi_[n];
    std::uint64_t r = n, out = n;
    for (auto p : base_primes_) {
      if (static_cast<std::uint64_t>(p) * p > r) break;
      if (r % p == 0) {
        out -= out / p;
        while (r % p == 0) r /= p;
      }
    }
    if (r > 1) out -= out / r;
    return out;
  }

  long double ratio(std::uint64_t n) const {
    return static_cast<long double>((*this)(n)) / static_cast<long double>(n);
  }

  // Visits (n, phi(n)) for lo <= n <= hi in blocks.
  template <typename Visit>
  void for_each(std::uint64_t lo, std::uint64_t hi, Visit&& visit) const {
    if (lo < 1 || hi > limit_) throw GuardViolation("totient range outside the table");
    std::uint64_t n = lo;
    for (; n <= hi && n <= dense_; ++n) visit(n, static_cast<std::uint64_t>(phi_[n]));
    constexpr std::uint64_t kBlock = 1 << 20;
    std::vector<std::uint64_t> rem, phi;
    while (n <= hi) {
      std::uint64_t end = std::min(hi, n + kBlock - 1);
      std::size_t len = end - n + 1;
      rem.resize(len);
      phi.resize(len);
      for (std::size_t i = 0; i < len; ++i) rem[i] = phi[i] = n + i;
      for (auto p : base_primes_) {
        if (static_cast<std::uint64_t>(p) * p > end) break;
        for (std::uint64_t m = (n + p - 1) / p * p; m <= end; m += p) {
          std::size_t i = m - n;
          phi[i] -= phi[i] / p;
          while (rem[i] % p == 0) rem[i] /= p;
        }
      }
      for (std::size_t i = 0; i < len; ++i) {
        if (rem[i] > 1) phi[i] -= phi[i] / rem[i];
        visit(n + i, phi[i]);
      }
      n = end + 1;
    }
  }

 private:
  std::uint64_t limit_ = 0, dense_ = 0;
  std::vector<std::uint32_t> phi_;
  std::vector<std::uint32_t> base_primes_;
};

inline TotientTable totient_sieve(std::uint64_t limit) { return TotientTable(limit); }

// Distinct prime factors by trial division.
inline std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p) continue;
    out.push_back(p);
    while (n % p == 0) n /= p;
  }
  if (n > 1) out.push_back(n);
  return out;
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

// sum phi(n)/n with each term floored at 2^-scale; exact for small sets.
inline FixedReal totient_average(const std::vector<std::int64_t>& set, const TotientTable& phi,
                                 unsigned scale = kDefaultScale, std::size_t exact_up_to = 4096) {
  mpz_class acc = 0, err = 0;
  mpq_class exact = 0;
  const bool keep_exact = set.size() <= exact_up_to;
  const mpz_class one = detail::pow2(scale);
  for (auto n : set) {
    if (n < 1) throw ValidationError("totient_average needs positive integers");
    auto un = static_cast<std::uint64_t>(n);
    mpz_class num = mpz_class(static_cast<unsigned long>(phi(un))) * one;
    mpz_class den(static_cast<unsigned long>(un));
    mpz_class q = detail::fdiv(num, den);
    acc += q;
    if (q * den != num) err += 1;
    if (keep_exact) exact += mpq_class(mpz_class(static_cast<unsigned long>(phi(un))), den);
  }
  if (keep_exact) {
    exact.canonicalize();
    return FixedReal::from_rational(exact, scale);
  }
  return FixedReal(acc + err / 2, scale, err - err / 2);
}

// ---------------------------------------------------------------------------
// Divisibility densities

// |{x in P : p | x}| / prod N_i, exact.
inline mpq_class alpha_p(const std::vector<GapElement>& elements, const mpz_class& card, std::uint64_t p) {
  if (p < 2) throw ValidationError("alpha_p needs a prime p");
  mpz_class hits = 0;
  const auto sp = static_cast<std::int64_t>(p);
  for (const auto& e : elements)
    if (e.value % sp == 0) hits += e.multiplicity;
  mpq_class a(hits, card);
  a.canonicalize();
  return a;
}

inline mpq_class alpha_p(const GAP& g, std::uint64_t p, std::uint64_t budget = kDefaultBudget) {
  return alpha_p(gap_elements(g, budget), g.box_size(), p);
}

struct AlphaRow {
  std::uint64_t p = 0;
  mpq_class alpha;
  long double bound = 0;         // 1/p + 1/min N_i
  long double scaled = 0;        // alpha_p p^eps
  long double excess = 0;        // alpha_p - bound
};

inline std::vector<AlphaRow> alpha_p_table(const GAP& g, std::uint64_t p_max, const mpq_class& eps,
                                           std::uint64_t budget = kDefaultBudget) {
  auto elems = gap_elements(g, budget);
  mpz_class card = g.box_size();
  std::int64_t min_len = *std::min_element(g.lengths.begin(), g.lengths.end());
  if (min_len < 1) throw ValidationError("alpha_p table needs positive lengths");
  long double e = Exponent::mpq_to_ld(eps);
  // Hits per prime from one factorization per element; 0 counts for every p.
  auto primes = primes_up_to(static_cast<std::uint32_t>(p_max));
  std::vector<std::uint64_t> hits(primes.size(), 0);
  std::uint64_t zero_hits = 0;
  for (const auto& el : elems) {
    if (el.value == 0) {
      zero_hits += el.multiplicity;
      continue;
    }
    for (auto q : prime_factors(static_cast<std::uint64_t>(el.value < 0 ? -el.value : el.value))) {
      if (q > p_max) continue;
      auto it = std::lower_bound(primes.begin(), primes.end(), static_cast<std::uint32_t>(q));
      hits[static_cast<std::size_t>(it - primes.begin())] += el.multiplicity;
    }
  }
  std::vector<AlphaRow> rows;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const std::uint64_t p = primes[i];
    AlphaRow r;
    r.p = p;
    r.alpha = mpq_class(mpz_class(static_cast<unsigned long>(hits[i] + zero_hits)), card);
    r.alpha.canonicalize();
    long double a = Exponent::mpq_to_ld(r.alpha);
    r.bound = 1.0L / p + 1.0L / static_cast<long double>(min_len);
    r.scaled = a * powl(static_cast<long double>(p), e);
    r.excess = a - r.bound;
    rows.push_back(r);
  }
  return rows;
}

inline void write_alpha_csv(std::ostream& os, const std::vector<AlphaRow>& rows, const mpq_class& eps) {
  os << "p,alpha_p,alpha_p_decimal,bound,alpha_p_times_p_eps,eps\n";
  for (const auto& r : rows)
    os << r.p << ',' << r.alpha.get_str() << ',' << q_decimal(r.alpha, 12) << ',' << ld_decimal(r.bound) << ','
       << ld_decimal(r.scaled) << ',' << q_decimal(eps, 6) << '\n';
}

// The AM-GM chain for a progression: the geometric mean of phi(n)/n over P
// against exp(-sum_p alpha_p log(1 + 2/p)).
struct AmGmReport {
  long double log_geometric_mean = 0;  // (1/|P|) sum log(phi(n)/n)
  long double log_via_alpha = 0;       // sum_p alpha_p log(1 - 1/p)
  long double log_lower = 0;           // -sum_p alpha_p log(1 + 2/p)
  bool holds = false;
};

inline AmGmReport amgm_check(const GAP& g, const TotientTable& phi, std::uint64_t budget = kDefaultBudget) {
  auto elems = gap_elements(g, budget);
  long double total = 0, count = 0;
  std::vector<std::pair<std::uint64_t, long double>> hits;  // (p, multiplicity)
  for (const auto& e : elems) {
    if (e.value < 1) throw ValidationError("AM-GM check needs positive elements");
    auto n = static_cast<std::uint64_t>(e.value);
    total += e.multiplicity * logl(phi.ratio(n));
    count += e.multiplicity;
    for (auto p : prime_factors(n)) hits.emplace_back(p, static_cast<long double>(e.multiplicity));
  }
  std::sort(hits.begin(), hits.end());
  AmGmReport r;
  r.log_geometric_mean = total / count;
  for (std::size_t i = 0; i < hits.size();) {
    std::uint64_t p = hits[i].first;
    long double m = 0;
    for (; i < hits.size() && hits[i].first == p; ++i) m += hits[i].second;
    long double a = m / count;
    r.log_via_alpha += a * log1pl(-1.0L / p);
    r.log_lower -= a * log1pl(2.0L / p);
  }
  r.holds = r.log_geometric_mean >= r.log_lower - 1e-12L &&
            std::fabs(r.log_geometric_mean - r.log_via_alpha) <= 1e-9L * (1 + std::fabs(r.log_via_alpha));
  return r;
}

// ---------------------------------------------------------------------------
// Congruence lattices

struct CongruenceLattice {
  IVec moduli;
  std::uint64_t p = 0;
  std::vector<std::size_t> divisible;  // J: indices with p | A_i
  std::vector<std::size_t> free;       // J^c
  IMat basis;                          // rows, in the coordinates of J^c
  mpz_class det;

  std::size_t dim() const { return free.size(); }
  bool contains(const IVec& x) const {
    __int128 s = 0;
    for (std::size_t t = 0; t < free.size(); ++t) s += static_cast<__int128>(moduli[free[t]]) * x[t];
    auto pp = static_cast<__int128>(p);
    return ((s % pp) + pp) % pp == 0;
  }
};

inline std::int64_t mod_inverse(std::int64_t a, std::int64_t p) {
  mpz_class inv, aa(static_cast<long>(((a % p) + p) % p)), pp(static_cast<long>(p));
  if (!mpz_invert(inv.get_mpz_t(), aa.get_mpz_t(), pp.get_mpz_t())) throw ValidationError("not invertible mod p");
  return inv.get_si();
}

// {x in Z^{J^c} : sum_{i in J^c} A_i x_i = 0 mod p}.
inline CongruenceLattice congruence_lattice(const IVec& A, std::uint64_t p) {
  if (!is_prime(p)) throw ValidationError("congruence lattice needs a prime p");
  CongruenceLattice L;
  L.moduli = A;
  L.p = p;
  const auto sp = static_cast<std::int64_t>(p);
  for (std::size_t i = 0; i < A.size(); ++i) (A[i] % sp == 0 ? L.divisible : L.free).push_back(i);
  if (L.free.empty()) throw ValidationError("every A_i is divisible by p; coprimality fails");
  const std::size_t d = L.free.size();
  const std::size_t last = d - 1;
  std::int64_t inv = mod_inverse(A[L.free[last]], sp);
  for (std::size_t t = 0; t < last; ++t) {
    IVec row(d, 0);
    row[t] = 1;
    std::int64_t c = (A[L.free[t]] % sp) * inv % sp;
    row[last] = ((-c) % sp + sp) % sp;
    L.basis.push_back(row);
  }
  IVec tail(d, 0);
  tail[last] = sp;
  L.basis.push_back(tail);
  L.det = abs(lat::det(L.basis));
  if (L.det != mpz_class(static_cast<unsigned long>(p))) throw GuardViolation("congruence lattice determinant is not p");
  return L;
}

// ---------------------------------------------------------------------------
// Lattice points in boxes

struct Box {
  IVec lo, hi;  // integer corners, lo_i <= hi_i

  static Box symmetric(const IVec& n) {
    Box b;
    for (auto x : n) {
      b.lo.push_back(-x);
      b.hi.push_back(x);
    }
    return b;
  }
  std::size_t dim() const { return lo.size(); }
  mpz_class volume() const {
    mpz_class v = 1;
    for (std::size_t i = 0; i < dim(); ++i) v *= mpz_class(static_cast<long>(hi[i] - lo[i]));
    return v;
  }
  mpz_class points() const {
    mpz_class v = 1;
    for (std::size_t i = 0; i < dim(); ++i) v *= mpz_class(static_cast<long>(hi[i] - lo[i] + 1));
    return v;
  }
};

struct DavenportReport {
  mpz_class count;
  mpq_class main_term;
  mpq_class discrepancy;  // |count - main|
  std::vector<std::int64_t> mu_squared;
  std::vector<long double> projections;  // V_0 .. V_{d-1}
  long double bound = 0;                 // sum_j V_j / (mu_1 ... mu_j)
  long double ratio = 0;                 // discrepancy / bound
};

// Count x in the box with sum A_i x_i = 0 mod p: all free coordinates but the
// last are enumerated, the last is counted as an arithmetic progression.
inline mpz_class count_congruence(const CongruenceLattice& L, const Box& box, std::uint64_t budget = kDefaultBudget) {
  const std::size_t d = L.dim();
  if (box.dim() != d) throw ValidationError("box dimension must equal the lattice dimension");
  for (std::size_t i = 0; i < d; ++i)
    if (box.lo[i] > box.hi[i]) return 0;
  mpz_class outer = 1;
  for (std::size_t i = 0; i + 1 < d; ++i) outer *= mpz_class(static_cast<long>(box.hi[i] - box.lo[i] + 1));
  if (outer > mpz_class(static_cast<unsigned long>(budget))) throw BudgetExceeded("box exceeds the enumeration budget");
  const auto p = static_cast<std::int64_t>(L.p);
  const std::size_t last = d - 1;
  const std::int64_t a_last = L.moduli[L.free[last]] % p;
  const std::int64_t inv = mod_inverse(a_last, p);
  // Points of [lo, hi] congruent to r mod p.
  auto progression = [&](std::int64_t r) -> std::int64_t {
    std::int64_t lo = box.lo[last], hi = box.hi[last];
    auto fl = [&](std::int64_t x) { return x >= 0 ? x / p : -((-x + p - 1) / p); };
    return fl(hi - r) - fl(lo - 1 - r);
  };
  mpz_class total = 0;
  IVec x(d, 0);
  for (std::size_t i = 0; i < last; ++i) x[i] = box.lo[i];
  while (true) {
    __int128 s = 0;
    for (std::size_t i = 0; i < last; ++i) s += static_cast<__int128>(L.moduli[L.free[i]]) * x[i];
    auto sm = static_cast<std::int64_t>(((s % p) + p) % p);
    std::int64_t r = static_cast<std::int64_t>((static_cast<__int128>(p - sm) % p) * inv % p);
    total += progression(r);
    std::size_t i = 0;
    while (i < last && ++x[i] > box.hi[i]) {
      x[i] = box.lo[i];
      ++i;
    }
    if (i >= last) break;
  }
  return total;
}

// V_j: the largest product of j side lengths.
inline std::vector<long double> box_projections(const Box& box) {
  const std::size_t d = box.dim();
  std::vector<long double> sides;
  for (std::size_t i = 0; i < d; ++i) sides.push_back(static_cast<long double>(box.hi[i] - box.lo[i]));
  std::sort(sides.rbegin(), sides.rend());
  std::vector<long double> v{1.0L};
  for (std::size_t j = 1; j < d; ++j) v.push_back(v.back() * sides[j - 1]);
  return v;
}

inline DavenportReport davenport_count(const Box& box, const CongruenceLattice& L,
                                       std::uint64_t budget = kDefaultBudget) {
  if (L.dim() > 4) throw GuardViolation("davenport_count supports d <= 4");
  DavenportReport r;
  r.count = count_congruence(L, box, budget);
  r.main_term = mpq_class(box.volume(), L.det);
  r.main_term.canonicalize();
  mpq_class diff = mpq_class(r.count) - r.main_term;
  r.discrepancy = abs(diff);
  EuclideanMinima mu = euclidean_minima(L.basis);
  r.mu_squared = mu.squared;
  r.projections = box_projections(box);
  long double prod = 1;
  for (std::size_t j = 0; j < L.dim(); ++j) {
    if (j > 0) prod *= std::sqrt(static_cast<long double>(mu.squared[j - 1]));
    r.bound += r.projections[j] / prod;
  }
  r.ratio = Exponent::mpq_to_ld(r.discrepancy) / r.bound;
  return r;
}

// The full lattice Z^d as a congruence lattice is not prime-indexed, so the
// trivial case is handled directly.
inline DavenportReport davenport_count_full(const Box& box) {
  DavenportReport r;
  r.count = box.points();
  r.main_term = mpq_class(box.volume());
  r.discrepancy = abs(mpq_class(r.count) - r.main_term);
  r.mu_squared.assign(box.dim(), 1);
  r.projections = box_projections(box);
  for (auto v : r.projections) r.bound += v;
  r.ratio = Exponent::mpq_to_ld(r.discrepancy) / r.bound;
  return r;
}

inline nlohmann::json to_json(const CongruenceLattice& L) {
  nlohmann::json j;
  j["moduli"] = L.moduli;
  j["p"] = L.p;
  std::vector<std::size_t> J, Jc;
  for (auto i : L.divisible) J.push_back(i + 1);
  for (auto i : L.free) Jc.push_back(i + 1);
  j["J"] = J;
  j["J_complement"] = Jc;
  j["basis"] = L.basis;
  j["det"] = L.det.get_str();
  return j;
}

inline nlohmann::json to_json(const DavenportReport& r) {
  nlohmann::json j;
  j["count"] = r.count.get_str();
  j["main_term"] = r.main_term.get_str();
  j["discrepancy"] = r.discrepancy.get_str();
  j["mu_squared"] = r.mu_squared;
  nlohmann::json v = nlohmann::json::array();
  for (auto x : r.projections) v.push_back(ld_decimal(x));
  j["projections"] = v;
  j["bound"] = ld_decimal(r.bound);
  j["ratio"] = ld_decimal(r.ratio);
  return j;
}

inline void write_davenport_csv(std::ostream& os, const Box& box, const CongruenceLattice& L,
                                const DavenportReport& r) {
  os << "d,p,box,count,main_term,discrepancy,bound,ratio\n";
  std::string b;
  for (std::size_t i = 0; i < box.dim(); ++i)
    b += (i ? " " : "") + std::string("[") + std::to_string(box.lo[i]) + ";" + std::to_string(box.hi[i]) + "]";
  os << L.dim() << ',' << L.p << ',' << b << ',' << r.count.get_str() << ',' << q_decimal(r.main_term, 12) << ','
     << q_decimal(r.discrepancy, 12) << ',' << ld_decimal(r.bound) << ',' << ld_decimal(r.ratio) << '\n';
}

}  // namespace bohrgap
