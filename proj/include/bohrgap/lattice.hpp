#pragma once

// Small-dimension lattice tools: exact integer linear algebra over mpz,
// LLL reduction in long double with an exact integer transform, and
// Fincke-Pohst enumeration. Floating point only prunes the search; every
// quantity that is reported is recomputed exactly by the caller.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "bohrgap/errors.hpp"

namespace bohrgap {

using IVec = std::vector<std::int64_t>;
using IMat = std::vector<IVec>;  // row vectors
using ZMat = std::vector<std::vector<mpz_class>>;
using RMat = std::vector<std::vector<long double>>;

namespace lat {

inline ZMat to_z(const IMat& m) {
  ZMat z(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (auto x : m[i]) z[i].emplace_back(static_cast<long>(x));
  return z;
}

// Determinant of a square matrix (Bareiss, fraction free).
inline mpz_class det(ZMat a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  int sign = 1;
  mpz_class prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t r = k + 1;
      while (r < n && a[r][k] == 0) ++r;
      if (r == n) return 0;
      std::swap(a[k], a[r]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i][j] = a[i][j] * a[k][k] - a[i][k] * a[k][j];
        mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
      }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

inline mpz_class det(const IMat& m) { return det(to_z(m)); }

inline std::size_t rank(const IMat& rows) {
  if (rows.empty()) return 0;
  std::vector<std::vector<mpq_class>> a(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (auto x : rows[i]) a[i].emplace_back(static_cast<long>(x));
  const std::size_t n = rows.size(), m = rows.front().size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < m && r < n; ++c) {
    std::size_t p = r;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) continue;
    std::swap(a[p], a[r]);
    for (std::size_t i = r + 1; i < n; ++i) {
      if (a[i][c] == 0) continue;
      mpq_class f = a[i][c] / a[r][c];
      for (std::size_t j = c; j < m; ++j) a[i][j] -= f * a[r][j];
    }
    ++r;
  }
  return r;
}

// gcd of all maximal minors of an i x k integer matrix; the rows extend to a
// basis of Z^k iff this is 1.
inline mpz_class minors_gcd(const IMat& rows) {
  const std::size_t i = rows.size(), k = rows.empty() ? 0 : rows.front().size();
  if (i == 0) return 1;
  mpz_class g = 0;
  std::vector<std::size_t> cols(i);
  std::iota(cols.begin(), cols.end(), 0);
  while (true) {
    ZMat sub(i, std::vector<mpz_class>(i));
    for (std::size_t r = 0; r < i; ++r)
      for (std::size_t c = 0; c < i; ++c) sub[r][c] = static_cast<long>(rows[r][cols[c]]);
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), mpz_class(det(sub)).get_mpz_t());
    if (g == 1) return g;
    // next combination
    std::size_t p = i;
    while (p > 0 && cols[p - 1] == k - i + p - 1) --p;
    if (p == 0) break;
    ++cols[p - 1];
    for (std::size_t q = p; q < i; ++q) cols[q] = cols[q - 1] + 1;
  }
  return g;
}

// Inverse of a unimodular integer matrix (rows), exact.
inline ZMat unimodular_inverse(const IMat& m) {
  const std::size_t n = m.size();
  std::vector<std::vector<mpq_class>> a(n, std::vector<mpq_class>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = static_cast<long>(m[i][j]);
    a[i][n + i] = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) throw GuardViolation("matrix is singular");
    std::swap(a[p], a[c]);
    mpq_class piv = a[c][c];
    for (auto& x : a[c]) x /= piv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || a[i][c] == 0) continue;
      mpq_class f = a[i][c];
      for (std::size_t j = 0; j < 2 * n; ++j) a[i][j] -= f * a[c][j];
    }
  }
  ZMat inv(n, std::vector<mpz_class>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const mpq_class& q = a[i][n + j];
      if (q.get_den() != 1) throw GuardViolation("matrix is not unimodular");
      inv[i][j] = q.get_num();
    }
  return inv;
}

// Gram-Schmidt data of the rows of b.
struct GramSchmidt {
  RMat mu;
  std::vector<long double> norms;  // |b*_i|^2
};

inline GramSchmidt gram_schmidt(const RMat& b) {
  const std::size_t n = b.size(), m = b.empty() ? 0 : b.front().size();
  GramSchmidt gs;
  gs.mu.assign(n, std::vector<long double>(n, 0.0L));
  gs.norms.assign(n, 0.0L);
  RMat star = b;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      long double dot = 0;
      for (std::size_t t = 0; t < m; ++t) dot += b[i][t] * star[j][t];
      gs.mu[i][j] = gs.norms[j] > 0 ? dot / gs.norms[j] : 0;
      for (std::size_t t = 0; t < m; ++t) star[i][t] -= gs.mu[i][j] * star[j][t];
    }
    long double nn = 0;
    for (std::size_t t = 0; t < m; ++t) nn += star[i][t] * star[i][t];
    gs.norms[i] = nn;
    gs.mu[i][i] = 1;
  }
  return gs;
}

// LLL on the rows of b; the same row operations are applied to the integer
// matrix u so that b = u * (original generators) stays true.
inline void lll(RMat& b, IMat& u, long double delta = 0.99L) {
  const std::size_t n = b.size();
  if (n < 2) return;
  auto sub_row = [&](std::size_t i, std::size_t j, std::int64_t q) {
    for (std::size_t t = 0; t < b[i].size(); ++t) b[i][t] -= static_cast<long double>(q) * b[j][t];
    for (std::size_t t = 0; t < u[i].size(); ++t) u[i][t] -= q * u[j][t];
  };
  std::size_t k = 1;
  GramSchmidt gs = gram_schmidt(b);
  std::size_t guard = 0;
  while (k < n) {
    if (++guard > 100000) throw GuardViolation("LLL did not terminate");
    for (std::size_t jj = k; jj-- > 0;) {
      long double m = gs.mu[k][jj];
      if (std::fabs(m) > 0.5L) {
        std::int64_t q = static_cast<std::int64_t>(std::llround(m));
        sub_row(k, jj, q);
        gs = gram_schmidt(b);
      }
    }
    if (gs.norms[k] >= (delta - gs.mu[k][k - 1] * gs.mu[k][k - 1]) * gs.norms[k - 1]) {
      ++k;
    } else {
      std::swap(b[k], b[k - 1]);
      std::swap(u[k], u[k - 1]);
      gs = gram_schmidt(b);
      k = k > 1 ? k - 1 : 1;
    }
  }
}

// All nonzero integer coefficient vectors y with |sum y_i b_i|^2 <= r2 (both
// signs). Calls visit(y). Throws BudgetExceeded past `budget` visits.
template <typename Visit>
void enumerate_ball(const RMat& b, long double r2, std::uint64_t budget, Visit&& visit) {
  const std::size_t n = b.size();
  GramSchmidt gs = gram_schmidt(b);
  std::vector<std::int64_t> y(n, 0);
  std::vector<long double> partial(n + 1, 0.0L);
  std::uint64_t count = 0;
  // Inflate slightly so rounding in the pruning can only add candidates.
  const long double bound = r2 * (1.0L + 1e-9L) + 1e-18L;
  auto recurse = [&](auto&& self, std::size_t level) -> void {
    long double c = 0;
    for (std::size_t j = level + 1; j < n; ++j) c -= gs.mu[j][level] * static_cast<long double>(y[j]);
    long double rem = bound - partial[level + 1];
    if (rem < 0) return;
    long double w = std::sqrt(rem / gs.norms[level]);
    std::int64_t lo = static_cast<std::int64_t>(std::ceil(c - w)), hi = static_cast<std::int64_t>(std::floor(c + w));
    for (std::int64_t x = lo; x <= hi; ++x) {
      long double t = static_cast<long double>(x) - c;
      partial[level] = partial[level + 1] + t * t * gs.norms[level];
      if (partial[level] > bound) continue;
      y[level] = x;
      if (level == 0) {
        bool nonzero = false;
        for (auto v : y) nonzero = nonzero || v != 0;
        if (nonzero) {
          if (++count > budget) throw BudgetExceeded("lattice enumeration budget exceeded (" + std::to_string(budget) + ")");
          visit(y);
        }
      } else {
        self(self, level - 1);
      }
    }
    y[level] = 0;
  };
  if (n > 0) recurse(recurse, n - 1);
}

inline IVec combine(const IMat& u, const IVec& y) {
  IVec v(u.front().size(), 0);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t t = 0; t < v.size(); ++t) v[t] += y[i] * u[i][t];
  return v;
}

// First nonzero coordinate positive.
inline bool canonical_sign(const IVec& v) {
  for (auto x : v)
    if (x != 0) return x > 0;
  return false;
}

inline std::int64_t dot(const IVec& a, const IVec& b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace lat

// Euclidean successive minima of the lattice spanned by integer rows, via
// reduce-then-enumerate with exact integer squared norms.
struct EuclideanMinima {
  std::vector<std::int64_t> squared;  // mu_j^2, exact
  IMat vectors;                       // attaining, linearly independent
  std::vector<long double> values() const {
    std::vector<long double> v;
    for (auto s : squared) v.push_back(std::sqrt(static_cast<long double>(s)));
    return v;
  }
};

inline EuclideanMinima euclidean_minima(const IMat& basis, std::uint64_t budget = 10'000'000) {
  const std::size_t n = basis.size();
  if (n == 0) return {};
  if (lat::rank(basis) != n) throw ValidationError("lattice basis is not independent");
  RMat b(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto x : basis[i]) b[i].push_back(static_cast<long double>(x));
  IMat u(n, IVec(n, 0));
  for (std::size_t i = 0; i < n; ++i) u[i][i] = 1;
  lat::lll(b, u);
  IMat red(n);
  std::int64_t r2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    red[i] = IVec(basis.front().size(), 0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t t = 0; t < red[i].size(); ++t) red[i][t] += u[i][j] * basis[j][t];
    r2 = std::max(r2, lat::dot(red[i], red[i]));
  }
  std::vector<std::pair<std::int64_t, IVec>> cand;
  lat::enumerate_ball(b, static_cast<long double>(r2), budget, [&](const IVec& y) {
    IVec v(basis.front().size(), 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (y[j] == 0) continue;
      for (std::size_t t = 0; t < v.size(); ++t) v[t] += y[j] * red[j][t];
    }
    if (!lat::canonical_sign(v)) return;
    std::int64_t s = lat::dot(v, v);
    if (s <= r2) cand.emplace_back(s, v);
  });
  std::sort(cand.begin(), cand.end());
  EuclideanMinima out;
  for (auto& [s, v] : cand) {
    IMat trial = out.vectors;
    trial.push_back(v);
    if (lat::rank(trial) == trial.size()) {
      out.vectors.push_back(v);
      out.squared.push_back(s);
      if (out.vectors.size() == n) break;
    }
  }
  if (out.vectors.size() != n) throw GuardViolation("euclidean minima enumeration incomplete");
  return out;
}

}  // namespace bohrgap
