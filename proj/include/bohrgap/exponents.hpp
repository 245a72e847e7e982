#pragma once

// Finite-horizon estimates of the Diophantine exponents of a target vector:
// multiplicative, simultaneous, dual, and the uniform inhomogeneous proxy.
//
// Each supremum-type estimate is a running maximum over n in [n_min, n_max]
// of -log f(n) / log n, where f(n) is bounded above through the 128-bit
// kernel; the reported value is therefore a lower bound for the finite
// maximum. Exact zeros short-circuit into an infinity witness.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bohrgap/errors.hpp"
#include "bohrgap/realfield.hpp"
#include "bohrgap/torus.hpp"

namespace bohrgap {

struct ExponentEstimate {
  std::optional<long double> value;  // absent when an infinity witness exists
  std::vector<std::int64_t> infinity_witness;
  std::vector<std::int64_t> argmax;  // the n (or h) achieving the value
  std::uint64_t n_min = 2;
  std::uint64_t horizon = 0;

  bool infinite() const { return !infinity_witness.empty(); }
};

namespace detail {

inline constexpr long double kLn2 = 0.693147180559945309417232121458176568L;

// log of v * 2^-128, v > 0.
inline long double log_unit(u128 v) { return logl(static_cast<long double>(v)) - 128 * kLn2; }

inline u128 sat_add(u128 a, u128 b) {
  u128 s = a + b;
  return s < a ? ~static_cast<u128>(0) : s;
}

// Upper bound for ||.|| in 2^-128 units; nullopt on an exact zero.
inline std::optional<u128> dist_upper(const TorusForm& f, std::int64_t n) {
  u128 d = torus_dist(f.phase(n));
  u128 e = f.err(static_cast<std::uint64_t>(n < 0 ? -n : n));
  if (d <= e && f.has_exact(n) && *f.exact_dist(n) == 0) return std::nullopt;
  u128 up = sat_add(d, e);
  return up > kHalf128 ? kHalf128 : up;
}

inline void check_horizon(std::uint64_t n_min, std::uint64_t n_max) {
  if (n_min < 2) throw ValidationError("exponent horizons start at n >= 2");
  if (n_max < n_min) throw ValidationError("horizon n_max must be >= n_min");
  if (n_max > (1ULL << 40)) throw GuardViolation("horizon above 2^40");
}

enum class Combine { product, max };

// Running max over n of -log(combine_i ||n alpha_i - gamma_i||) / log n.
inline ExponentEstimate scan_exponent(const std::vector<TorusForm>& forms, std::uint64_t n_min, std::uint64_t n_max,
                                      Combine how) {
  check_horizon(n_min, n_max);
  ExponentEstimate est;
  est.n_min = n_min;
  est.horizon = n_max;
  long double best = -std::numeric_limits<long double>::infinity();
  for (std::uint64_t un = n_min; un <= n_max; ++un) {
    auto n = static_cast<std::int64_t>(un);
    long double lg = how == Combine::product ? 0 : -std::numeric_limits<long double>::infinity();
    bool zero = false;
    for (const auto& f : forms) {
      auto up = dist_upper(f, n);
      if (!up) {
        zero = true;
        break;
      }
      long double l = log_unit(*up);
      lg = how == Combine::product ? lg + l : std::max(lg, l);
    }
    if (zero) {
      est.infinity_witness = {n};
      est.value.reset();
      est.argmax.clear();
      return est;
    }
    long double v = -lg / logl(static_cast<long double>(un));
    if (v > best) {
      best = v;
      est.argmax = {n};
    }
  }
  est.value = best;
  return est;
}

}  // namespace detail

inline std::vector<TorusForm> exponent_forms(const TargetVector& alpha, const std::vector<FixedReal>& gamma) {
  alpha.validate();
  return make_forms(alpha, gamma);
}

// Estimate of the multiplicative exponent.
inline ExponentEstimate mult_exponent_est(const TargetVector& alpha, const std::vector<FixedReal>& gamma,
                                          std::uint64_t n_max, std::uint64_t n_min = 2) {
  return detail::scan_exponent(exponent_forms(alpha, gamma), n_min, n_max, detail::Combine::product);
}

// Estimate of the simultaneous exponent.
inline ExponentEstimate simult_exponent_est(const TargetVector& alpha, std::uint64_t n_max, std::uint64_t n_min = 2) {
  auto forms = exponent_forms(alpha, zeros(alpha.d(), alpha.alphas.front().scale()));
  return detail::scan_exponent(forms, n_min, n_max, detail::Combine::max);
}

// Estimate of the dual exponent over h with n_min <= |h|_inf <= h_max.
inline ExponentEstimate dual_exponent_est(const TargetVector& alpha, std::uint64_t h_max, std::uint64_t n_min = 2,
                                          std::uint64_t budget = 200'000'000) {
  alpha.validate();
  const std::size_t d = alpha.d();
  if (d > 3) throw GuardViolation("dual exponent search supports d <= 3");
  detail::check_horizon(n_min, h_max);
  if (d == 1) {
    auto forms = exponent_forms(alpha, zeros(1, alpha.alphas.front().scale()));
    return detail::scan_exponent(forms, n_min, h_max, detail::Combine::max);
  }
  long double side = 2.0L * static_cast<long double>(h_max) + 1;
  if (powl(side, static_cast<long double>(d)) / 2 > static_cast<long double>(budget))
    throw BudgetExceeded("dual search box exceeds budget");

  std::vector<Frac128> a(d);
  for (std::size_t i = 0; i < d; ++i) a[i] = to_frac128(alpha.alphas[i]);
  ExponentEstimate est;
  est.n_min = n_min;
  est.horizon = h_max;
  long double best = -std::numeric_limits<long double>::infinity();
  const auto H = static_cast<std::int64_t>(h_max);
  std::vector<std::int64_t> h(d, -H);
  while (true) {
    std::int64_t norm = 0;
    for (auto x : h) norm = std::max(norm, x < 0 ? -x : x);
    std::size_t lead = 0;
    while (lead < d && h[lead] == 0) ++lead;
    if (norm >= static_cast<std::int64_t>(n_min) && lead < d && h[lead] > 0) {
      u128 phase = 0, err = 0;
      for (std::size_t i = 0; i < d; ++i) {
        phase += static_cast<u128>(static_cast<__int128>(h[i])) * a[i].value;
        err += static_cast<u128>(h[i] < 0 ? -h[i] : h[i]) * a[i].err;
      }
      u128 dist = torus_dist(phase);
      bool zero = false;
      bool exact = true;
      for (std::size_t i = 0; i < d; ++i) exact = exact && (h[i] == 0 || alpha.alphas[i].exact().has_value());
      if (dist <= err && exact) {
        mpq_class s = 0;
        for (std::size_t i = 0; i < d; ++i)
          if (h[i] != 0) s += mpq_class(mpz_class(static_cast<long>(h[i]))) * *alpha.alphas[i].exact();
        zero = detail::dist_nearest_q(s) == 0;
      }
      if (zero) {
        est.infinity_witness = h;
        est.value.reset();
        est.argmax.clear();
        return est;
      }
      u128 up = detail::sat_add(dist, err);
      if (up > kHalf128) up = kHalf128;
      long double v = -detail::log_unit(up) / logl(static_cast<long double>(norm));
      if (v > best) {
        best = v;
        est.argmax = h;
      }
    }
    std::size_t i = d;
    while (i > 0) {
      --i;
      if (++h[i] <= H) break;
      h[i] = -H;
      if (i == 0) {
        est.value = best;
        return est;
      }
    }
  }
}

struct UniformEstimate {
  ExponentEstimate overall;          // min over X
  std::vector<std::uint64_t> x_list;
  std::vector<std::optional<long double>> per_x;  // absent = infinite at that X
};

// min over X of max over 1 <= n < X of min_i -log||n alpha_i - gamma_i|| / log X.
inline UniformEstimate uniform_inhom_exponent_est(const TargetVector& alpha, const std::vector<FixedReal>& gamma,
                                                  const std::vector<std::uint64_t>& x_list) {
  auto forms = exponent_forms(alpha, gamma);
  if (x_list.empty()) throw ValidationError("x_list must be nonempty");
  for (std::size_t i = 0; i < x_list.size(); ++i) {
    if (x_list[i] < 10) throw ValidationError("horizons X must be >= 10");
    if (i && x_list[i] <= x_list[i - 1]) throw ValidationError("x_list must be increasing");
  }
  if (x_list.back() > (1ULL << 40)) throw GuardViolation("horizon above 2^40");
  UniformEstimate u;
  u.x_list = x_list;
  u.overall.n_min = 1;
  u.overall.horizon = x_list.back();
  // Running min over n of max_i ||.||, and the first exact zero.
  long double best_log = 0;  // log of the running min, in natural units
  std::int64_t best_n = 0;
  std::optional<std::int64_t> zero_at;
  std::size_t xi = 0;
  std::optional<long double> overall;
  std::vector<std::int64_t> overall_arg;
  auto close_x = [&](std::uint64_t X) {
    if (zero_at) {
      u.per_x.push_back(std::nullopt);
      return;
    }
    long double v = -best_log / logl(static_cast<long double>(X));
    u.per_x.push_back(v);
    if (!overall || v < *overall) {
      overall = v;
      overall_arg = {best_n};
    }
  };
  for (std::uint64_t un = 1; xi < x_list.size(); ++un) {
    while (xi < x_list.size() && un >= x_list[xi]) close_x(x_list[xi++]);
    if (xi == x_list.size()) break;
    if (zero_at) continue;
    auto n = static_cast<std::int64_t>(un);
    long double worst = -std::numeric_limits<long double>::infinity();
    bool all_zero = true;
    for (const auto& f : forms) {
      auto up = detail::dist_upper(f, n);
      if (up) {
        all_zero = false;
        worst = std::max(worst, detail::log_unit(*up));
      }
    }
    if (all_zero) {
      zero_at = n;
      continue;
    }
    if (best_n == 0 || worst < best_log) {
      best_log = worst;
      best_n = n;
    }
  }
  if (overall) {
    u.overall.value = overall;
    u.overall.argmax = overall_arg;
  } else {
    u.overall.infinity_witness = {*zero_at};
  }
  return u;
}

struct TransferenceHorizons {
  std::uint64_t n_max = 1'000'000;
  std::uint64_t h_max = 1'000'000;
  std::uint64_t n_min = 2;
  std::vector<std::uint64_t> x_list{1000, 10000, 100000, 1000000};
  long double tolerance = 0.1L;
};

struct ExponentReport {
  std::size_t d = 0;
  ExponentEstimate omega;        // simultaneous
  ExponentEstimate omega_times;  // multiplicative (gamma = 0)
  ExponentEstimate omega_star;   // dual
  UniformEstimate omega_hat;
  TransferenceHorizons horizons;
  bool degenerate = false;  // an infinity witness was found
  // Advisory flags; absent when an estimate is infinite.
  std::optional<bool> mult_vs_simult;   // d omega <= omega_times
  std::optional<bool> khintchine;       // omega* / (d + (d-1) omega*) <= omega
  std::optional<bool> bugeaud_laurent;  // omega_hat >= 1 / omega*
  std::optional<bool> main_hypothesis;  // omega_times < d / (d-1)
};

inline ExponentReport transference_report(const TargetVector& alpha, const std::vector<FixedReal>& gamma,
                                          const TransferenceHorizons& hz = {}) {
  ExponentReport r;
  r.d = alpha.d();
  r.horizons = hz;
  r.omega = simult_exponent_est(alpha, hz.n_max, hz.n_min);
  r.omega_times = mult_exponent_est(alpha, zeros(alpha.d(), alpha.alphas.front().scale()), hz.n_max, hz.n_min);
  r.omega_star = dual_exponent_est(alpha, hz.h_max, hz.n_min);
  r.omega_hat = uniform_inhom_exponent_est(alpha, gamma, hz.x_list);
  r.degenerate = r.omega.infinite() || r.omega_times.infinite() || r.omega_star.infinite();
  const long double tol = hz.tolerance;
  const auto d = static_cast<long double>(r.d);
  if (r.omega.value && r.omega_times.value) r.mult_vs_simult = d * *r.omega.value <= *r.omega_times.value + tol;
  if (r.omega.value && r.omega_star.value) {
    long double w = *r.omega_star.value;
    r.khintchine = w / (d + (d - 1) * w) <= *r.omega.value + tol;
  }
  if (r.omega_hat.overall.value && r.omega_star.value && *r.omega_star.value > 0)
    r.bugeaud_laurent = *r.omega_hat.overall.value >= 1 / *r.omega_star.value - tol;
  if (!r.degenerate) {
    if (r.d == 1) r.main_hypothesis = true;
    else if (r.omega_times.value) r.main_hypothesis = *r.omega_times.value < d / (d - 1) + tol;
  } else {
    r.main_hypothesis = false;
  }
  return r;
}

inline nlohmann::json to_json(const ExponentEstimate& e) {
  nlohmann::json j;
  j["n_min"] = e.n_min;
  j["horizon"] = e.horizon;
  if (e.value) {
    j["value"] = ld_decimal(*e.value);
    j["argmax"] = e.argmax;
  } else {
    j["value"] = "inf";
    j["infinity_witness"] = e.infinity_witness;
  }
  return j;
}

inline nlohmann::json to_json(const UniformEstimate& u) {
  nlohmann::json j = to_json(u.overall);
  j["x_list"] = u.x_list;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& v : u.per_x) per.push_back(v ? ld_decimal(*v) : std::string("inf"));
  j["per_x"] = per;
  return j;
}

inline nlohmann::json to_json(const ExponentReport& r) {
  auto flag = [](const std::optional<bool>& b) -> nlohmann::json {
    if (!b) return nullptr;
    return *b;
  };
  nlohmann::json j;
  j["d"] = r.d;
  j["omega"] = to_json(r.omega);
  j["omega_times"] = to_json(r.omega_times);
  j["omega_star"] = to_json(r.omega_star);
  j["omega_hat"] = to_json(r.omega_hat);
  j["degenerate"] = r.degenerate;
  j["tolerance"] = ld_decimal(r.horizons.tolerance, 6);
  j["flags"] = {{"d_omega_le_omega_times", flag(r.mult_vs_simult)},
                {"khintchine", flag(r.khintchine)},
                {"omega_hat_ge_inv_omega_star", flag(r.bugeaud_laurent)},
                {"main_hypothesis", flag(r.main_hypothesis)}};
  j["note"] = "finite-horizon estimates; the uniform proxy has no effective rate";
  return j;
}

}  // namespace bohrgap
