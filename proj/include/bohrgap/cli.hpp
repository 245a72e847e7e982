#pragma once

// Batch front-end. Every option lives on the root command so that a flat
// key = value config file mirrors the flags; subcommands select the action.
//
// Payloads (CSV/JSON) go to --out when given, together with manifest.json
// (config echo, library version, payload hashes, timings). `rerun` replays a
// manifest and compares payload hashes.
//
// Exit codes: 0 success (including documented construction failures, which
// are reported in the payload), 2 validation, 3 precision or budget
// exhaustion, 1 reproducibility mismatch on rerun.

#include <gmpxx.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bohrgap/bohr.hpp"
#include "bohrgap/counting.hpp"
#include "bohrgap/errors.hpp"
#include "bohrgap/exponents.hpp"
#include "bohrgap/gap.hpp"
#include "bohrgap/minima.hpp"
#include "bohrgap/sums.hpp"
#include "bohrgap/version.hpp"

namespace bohrgap::cli {

struct RunConfig {
  std::size_t k = 0;  // 0: inferred from alpha
  std::vector<std::string> alpha, gamma, delta;
  std::int64_t N = 100000;
  std::string eps = "1/20";
  unsigned scale = kDefaultScale;
  std::uint64_t seed = 20240101;
  std::uint64_t budget = kDefaultBudget;
  std::string out;
  bool no_restrict = false;
  // bohr
  std::string mode = "enumerate";
  std::string range = "symmetric";
  // gap
  std::string ck;
  std::string gap_file;
  // count
  std::vector<std::int64_t> A, lo, hi;
  std::uint64_t p = 2;
  std::uint64_t pmax = 100;
  // sums and experiment
  std::vector<std::int64_t> checkpoints;
  std::string psi = "divergent";
  std::string psi_c = "1";
  std::string psi_s = "2";
  std::string eta = "1/16";
  std::uint64_t samples = 200;
  // exponents
  std::uint64_t horizon = 1'000'000, hmax = 1'000'000, nmin = 2;
  std::vector<std::uint64_t> xlist;
  // rerun
  std::string manifest;
};

// Named payloads in emission order.
using Payloads = std::vector<std::pair<std::string, std::string>>;

class ReproMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline mpq_class parse_q(std::string text) {
  if (text.rfind("rat:", 0) == 0) text = text.substr(4);
  if (text.rfind("dec:", 0) == 0) text = text.substr(4);
  if (text.find('/') != std::string::npos) {
    mpq_class q;
    try {
      q = mpq_class(text, 10);
    } catch (const std::invalid_argument&) {
      throw ValidationError("malformed rational '" + text + "'");
    }
    if (q.get_den() == 0) throw ValidationError("zero denominator in '" + text + "'");
    q.canonicalize();
    return q;
  }
  return FixedReal::parse_decimal(text);
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::uint64_t fnv1a_bytes(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

inline BohrSpec make_spec(const RunConfig& c) {
  if (c.alpha.empty()) throw ValidationError("--alpha is required");
  BohrSpec s;
  for (const auto& a : c.alpha) s.alpha.alphas.push_back(parse_real(a, c.scale));
  const std::size_t d = s.alpha.d();
  if (c.k != 0 && c.k != d + 1)
    throw ValidationError("--k " + std::to_string(c.k) + " needs k-1 = " + std::to_string(c.k - 1) + " alpha values, got " +
                          std::to_string(d));
  if (c.gamma.empty()) {
    s.gamma = zeros(d, c.scale);
  } else {
    if (c.gamma.size() != d) throw ValidationError("--gamma must have k-1 entries");
    for (const auto& g : c.gamma) s.gamma.push_back(parse_real(g, c.scale));
  }
  // A single delta applies to every coordinate.
  if (c.delta.size() == 1) {
    s.delta.assign(d, parse_real(c.delta[0], c.scale));
  } else if (c.delta.size() == d) {
    for (const auto& x : c.delta) s.delta.push_back(parse_real(x, c.scale));
  } else if (!c.delta.empty()) {
    throw ValidationError("--delta must have 1 or k-1 entries");
  } else {
    s.delta.assign(d, FixedReal::from_rational(mpq_class(1, 10), c.scale));
  }
  s.N = c.N;
  s.epsilon = detail::parse_q(c.eps);
  s.alpha.validate();
  return s;
}

inline ApproxFunction make_psi(const RunConfig& c, std::size_t k) {
  mpq_class cc = detail::parse_q(c.psi_c);
  if (c.psi == "divergent") return ApproxFunction::divergent(k, cc);
  if (c.psi == "convergent") return ApproxFunction::convergent(k, cc);
  if (c.psi == "power") return ApproxFunction::power(detail::parse_q(c.psi_s), cc);
  throw ValidationError("--psi must be divergent, convergent or power");
}

// ---------------------------------------------------------------------------
// Actions

inline Payloads run_bohr(const RunConfig& c, std::ostream& out) {
  BohrSpec spec = make_spec(c);
  spec.validate();
  BohrSet set;
  if (c.mode == "restrict") {
    set = restricted_bohr(spec);
  } else {
    if (c.range != "symmetric" && c.range != "positive") throw ValidationError("--range must be symmetric or positive");
    set = enumerate_bohr(spec, c.range == "symmetric" ? Range::symmetric : Range::positive);
    if (c.mode == "lift") set = lift_bohr(spec, set);
    else if (c.mode != "enumerate") throw ValidationError("--mode must be enumerate, lift or restrict");
  }
  std::ostringstream csv;
  write_bohr_csv(csv, spec, set);
  mpq_class ratio(static_cast<long>(set.size()));
  ratio /= spec.delta_product() * mpq_class(static_cast<long>(spec.N));
  nlohmann::json j = {{"mode", c.mode},
                      {"range", c.mode == "restrict" ? "restricted" : c.range},
                      {"N", spec.N},
                      {"count", set.size()},
                      {"count_over_delta_product_N", q_decimal(ratio, 12)}};
  out << "bohr " << c.mode << ": " << set.size() << " members (count / (delta product N) = " << q_decimal(ratio, 12)
      << ")\n";
  return {{"bohr.csv", csv.str()}, {"bohr.json", detail::dump(j)}};
}

inline Payloads run_minima(const RunConfig& c, std::ostream& out) {
  BohrSpec spec = make_spec(c);
  spec.validate();
  ConvexBody body = build_body(spec);
  MinimaResult m = successive_minima(body, c.budget);
  nlohmann::json j = to_json(m);
  j["lambda"] = body.lambda.to_decimal(12);
  for (std::size_t i = 0; i < m.k; ++i)
    out << "lambda_" << i + 1 << " = " << m.lambdas[i].to_decimal(12) << "  basis " << bohrgap::detail::fmt_vec(m.basis[i]) << "\n";
  return {{"minima.json", detail::dump(j)}};
}

inline Payloads run_gap_inner(const RunConfig& c, std::ostream& out) {
  BohrSpec spec = make_spec(c);
  InnerResult r = inner_gap(spec, c.budget);
  for (const auto& line : r.trace) out << line << "\n";
  out << "status: " << to_string(r.status) << (r.verified() ? " (verified)" : "") << "\n";
  if (!r.diagnostic.empty()) out << "diagnostic: " << r.diagnostic << "\n";
  return {{"gap_inner.json", detail::dump(to_json(r))}};
}

inline Payloads run_gap_outer(const RunConfig& c, std::ostream& out) {
  BohrSpec spec = make_spec(c);
  std::optional<FixedReal> ck;
  if (!c.ck.empty()) ck = parse_real(c.ck, c.scale);
  OuterResult r = outer_gap(spec, ck);
  out << "status: " << to_string(r.status) << "\n";
  out << "moduli " << bohrgap::detail::fmt_vec(r.gap.moduli) << " lengths " << bohrgap::detail::fmt_vec(r.gap.lengths) << "\n";
  out << "contained: " << (r.contained ? "yes" : "no") << " (" << r.lifted_points << " lifted points, " << r.violations
      << " violations)\n";
  return {{"gap_outer.json", detail::dump(to_json(r))}};
}

inline GAP gap_from_json(const nlohmann::json& j0) {
  const nlohmann::json& j = j0.contains("gap") ? j0.at("gap") : j0;
  GAP g;
  try {
    g.form = j.value("form", std::string("positive")) == "symmetric" ? GapForm::symmetric : GapForm::positive;
    g.base = j.at("base").get<std::int64_t>();
    g.moduli = j.at("moduli").get<IVec>();
    g.lengths = j.at("lengths").get<IVec>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed GAP JSON: ") + e.what());
  }
  if (g.moduli.size() != g.lengths.size() || g.moduli.empty())
    throw ValidationError("GAP moduli and lengths must be non-empty and of equal length");
  return g;
}

// P subset of B over |n| <= N, properness and gcd of the moduli.
inline Payloads run_gap_verify(const RunConfig& c, std::ostream& out) {
  if (c.gap_file.empty()) throw ValidationError("gap verify needs --gap FILE");
  std::ifstream in(c.gap_file);
  if (!in) throw ValidationError("cannot read " + c.gap_file);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  GAP g = gap_from_json(j);
  BohrSpec spec = make_spec(c);
  spec.validate();
  BohrMask mask = bohr_mask(spec, Range::symmetric);
  auto elems = gap_elements(g, c.budget);
  std::uint64_t violations = 0;
  std::optional<std::int64_t> first;
  for (const auto& e : elems) {
    if (!mask.test(e.value)) {
      ++violations;
      if (!first) first = e.value;
    }
  }
  ProperCertificate pc = is_proper(g, c.budget);
  std::int64_t gg = 0;
  for (auto m : g.moduli) gg = std::gcd(gg, m);
  nlohmann::json r = {{"gap", to_json(g)},
                      {"distinct_values", elems.size()},
                      {"contained", violations == 0},
                      {"violations", violations},
                      {"proper", pc.proper},
                      {"gcd_one", gg == 1}};
  if (first) r["first_violation"] = *first;
  out << "contained: " << (violations == 0 ? "yes" : "no") << " (" << violations << " violations), proper: "
      << (pc.proper ? "yes" : "no") << ", gcd(A) = " << gg << "\n";
  return {{"gap_verify.json", detail::dump(r)}};
}

inline Payloads run_count_davenport(const RunConfig& c, std::ostream& out) {
  if (c.A.empty()) throw ValidationError("count davenport needs --A");
  const std::size_t d = c.A.size();
  Box box;
  if (c.lo.empty() && c.hi.size() == d) {
    box = Box::symmetric(c.hi);
  } else if (c.lo.size() == d && c.hi.size() == d) {
    box.lo = c.lo;
    box.hi = c.hi;
  } else {
    throw ValidationError("--lo/--hi must have one entry per coordinate (--hi alone gives a symmetric box)");
  }
  for (std::size_t i = 0; i < d; ++i)
    if (box.lo[i] > box.hi[i]) throw ValidationError("box needs lo_i <= hi_i");
  if (!is_prime(c.p)) throw ValidationError("--p must be prime");
  CongruenceLattice L = congruence_lattice(c.A, c.p);
  DavenportReport r = davenport_count(box, L, c.budget);
  std::ostringstream csv;
  write_davenport_csv(csv, box, L, r);
  nlohmann::json j = {{"lattice", to_json(L)}, {"report", to_json(r)}, {"box_lo", box.lo}, {"box_hi", box.hi}};
  out << "count " << r.count.get_str() << ", main term " << q_decimal(r.main_term, 6) << ", discrepancy / bound "
      << ld_decimal(r.ratio, 6) << "\n";
  return {{"davenport.csv", csv.str()}, {"davenport.json", detail::dump(j)}};
}

inline Payloads run_count_alphap(const RunConfig& c, std::ostream& out) {
  BohrSpec spec = make_spec(c);
  InnerResult r = inner_gap(spec, c.budget);
  nlohmann::json j = {{"inner_status", to_string(r.status)}};
  if (!r.gap || r.status != GapStatus::ok) {
    out << "inner GAP unavailable: " << to_string(r.status) << "\n";
    j["rows"] = nlohmann::json::array();
    return {{"alphap.json", detail::dump(j)}};
  }
  auto rows = alpha_p_table(*r.gap, c.pmax, spec.epsilon, c.budget);
  std::ostringstream csv;
  write_alpha_csv(csv, rows, spec.epsilon);
  TotientTable phi(static_cast<std::uint64_t>(spec.N));
  AmGmReport am = amgm_check(*r.gap, phi, c.budget);
  long double worst = -1;
  for (const auto& row : rows) worst = std::max(worst, row.excess);
  j["gap"] = to_json(*r.gap);
  j["primes"] = rows.size();
  j["max_excess"] = ld_decimal(worst);
  j["amgm"] = {{"log_geometric_mean", ld_decimal(am.log_geometric_mean)},
               {"log_via_alpha", ld_decimal(am.log_via_alpha)},
               {"log_lower", ld_decimal(am.log_lower)},
               {"holds", am.holds}};
  out << rows.size() << " primes up to " << c.pmax << ", max(alpha_p - 1/p - 1/min N_i) = " << ld_decimal(worst, 6)
      << ", AM-GM " << (am.holds ? "holds" : "fails") << "\n";
  return {{"alphap.csv", csv.str()}, {"alphap.json", detail::dump(j)}};
}

inline Payloads run_count_totient(const RunConfig& c, std::ostream& out) {
  BohrSpec spec = make_spec(c);
  spec.validate();
  BohrSet set = c.no_restrict ? enumerate_bohr(spec, Range::positive) : restricted_bohr(spec);
  TotientTable phi(static_cast<std::uint64_t>(spec.N));
  FixedReal avg = set.members.empty() ? FixedReal::from_int(0) : totient_average(set.members, phi);
  nlohmann::json j = {{"N", spec.N},
                      {"restricted", !c.no_restrict},
                      {"members", set.size()},
                      {"average_phi", avg.to_decimal(12)},
                      {"exact", avg.is_exact()}};
  out << set.size() << " members, average phi(n) = " << avg.to_decimal(12) << "\n";
  return {{"totient.json", detail::dump(j)}};
}

inline SupportMask sums_mask(const RunConfig& c, const BohrSpec& s) {
  return c.no_restrict ? SupportMask::trivial(s.N) : support_mask(s.alpha, s.gamma, s.epsilon, s.N);
}

inline Payloads run_sums_t(const RunConfig& c, std::ostream& out) {
  BohrSpec s = make_spec(c);
  SupportMask mask = sums_mask(c, s);
  TotientTable phi(static_cast<std::uint64_t>(s.N));
  SumSeries series = t_sums(s.alpha, s.gamma, mask, c.checkpoints, &phi);
  std::ostringstream csv;
  write_sums_csv(csv, series);
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : series.points) {
    nlohmann::json e = {{"N", p.N},
                        {"terms", p.terms},
                        {"T", ld_decimal(p.T)},
                        {"T_rel_err", ld_decimal(p.T_err / p.T, 24)},
                        {"T_star", ld_decimal(*p.T_star)}};
    if (p.T_exact) e["T_exact"] = p.T_exact->get_str();
    if (p.T_star_exact) e["T_star_exact"] = p.T_star_exact->get_str();
    pts.push_back(e);
    out << "N = " << p.N << ": T = " << (p.T_exact ? p.T_exact->get_str() : ld_decimal(p.T))
        << ", T* = " << (p.T_star_exact ? p.T_star_exact->get_str() : ld_decimal(*p.T_star)) << "\n";
  }
  nlohmann::json j = {{"k", series.k}, {"eps", q_decimal(series.eps, 12)}, {"restricted", series.restricted},
                      {"excluded", mask.excluded()}, {"points", pts}};
  return {{"sums.csv", csv.str()}, {"sums.json", detail::dump(j)}};
}

inline Payloads run_sums_dyadic(const RunConfig& c, std::ostream& out) {
  BohrSpec s = make_spec(c);
  SupportMask mask = sums_mask(c, s);
  DyadicTable t = dyadic_table(s.alpha, s.gamma, s.N, mask);
  SumPoint p = t_sum(s.alpha, s.gamma, s.N, mask);
  bool ok = dyadic_sandwich(t, p, s.alpha.k());
  nlohmann::json j = to_json(t);
  j["T"] = ld_decimal(p.T);
  j["sandwich"] = ok;
  out << t.cells.size() << " cells, reconstruction " << t.reconstruction.get_str() << ", T = " << ld_decimal(p.T)
      << ", sandwich " << (ok ? "holds" : "fails") << "\n";
  return {{"dyadic.json", detail::dump(j)}};
}

inline Payloads run_sums_dscheck(const RunConfig& c, std::ostream& out) {
  BohrSpec s = make_spec(c);
  auto cps = c.checkpoints;
  if (cps.empty()) cps = bohrgap::detail::powers_of_ten_upto(s.N);
  TotientTable phi(static_cast<std::uint64_t>(*std::max_element(cps.begin(), cps.end())));
  DsReport r = ds_hypothesis_check(make_psi(c, s.alpha.k()), s.alpha, s.gamma, s.epsilon, cps, phi);
  nlohmann::json j = to_json(r);
  j["psi"] = make_psi(c, s.alpha.k()).describe();
  BohrSpec eta_spec = s;
  eta_spec.validate();
  EtaSplit es = eta_split_check(eta_spec, detail::parse_q(c.eta), phi);
  j["eta_split"] = {{"eta", c.eta}, {"outer", es.outer}, {"inner", es.inner}, {"nested", es.nested}, {"identity", es.identity}};
  for (const auto& p : r.points)
    out << "N = " << p.N << ": L/R = " << ld_decimal(p.L_over_R) << ", U/R = " << ld_decimal(p.U_over_R) << "\n";
  out << "L <= U: " << (r.l_le_u ? "yes" : "no") << ", eta split identity: " << (es.identity ? "yes" : "no") << "\n";
  return {{"dscheck.json", detail::dump(j)}};
}

inline Payloads run_exponents(const RunConfig& c, std::ostream& out) {
  BohrSpec s = make_spec(c);
  TransferenceHorizons hz;
  hz.n_max = c.horizon;
  hz.h_max = c.hmax;
  hz.n_min = c.nmin;
  if (!c.xlist.empty()) hz.x_list = c.xlist;
  ExponentReport r = transference_report(s.alpha, s.gamma, hz);
  nlohmann::json j = to_json(r);
  auto show = [](const ExponentEstimate& e) { return e.infinite() ? std::string("inf") : ld_decimal(*e.value, 9); };
  out << "omega = " << show(r.omega) << ", omega_times = " << show(r.omega_times) << ", omega_star = " << show(r.omega_star)
      << ", omega_hat = " << show(r.omega_hat.overall) << "\n";
  return {{"exponents.json", detail::dump(j)}};
}

inline Payloads run_gallagher(const RunConfig& c, std::ostream& out) {
  BohrSpec s = make_spec(c);
  GallagherReport r =
      gallagher_experiment(s.alpha, s.gamma, make_psi(c, s.alpha.k()), c.samples, s.N, c.seed, c.checkpoints);
  std::ostringstream csv;
  write_experiment_csv(csv, r);
  nlohmann::json j = to_json(r);
  j["psi"] = make_psi(c, s.alpha.k()).describe();
  out << r.samples.size() << " samples, hit fraction " << ld_decimal(r.hit_fraction, 6) << ", median hits at N = "
      << ld_decimal(r.median_hits.back(), 1) << "\n";
  return {{"experiment.csv", csv.str()}, {"experiment.json", detail::dump(j)}};
}

// ---------------------------------------------------------------------------
// Driver

struct Command {
  std::string path;  // e.g. "gap inner"
  std::function<Payloads(const RunConfig&, std::ostream&)> action;
};

inline int exit_code_for(const std::exception_ptr& ep, std::ostream& err) {
  try {
    std::rethrow_exception(ep);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const GuardViolation& e) {
    err << "guard violation: " << e.what() << "\n";
    return 2;
  } catch (const PrecisionExhausted& e) {
    err << "precision exhausted: " << e.what() << "\n";
    return 3;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return 3;
  } catch (const ReproMismatch& e) {
    err << "rerun mismatch: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + p.string());
  f << body;
}

// Config echo: every option with a value, in a form the config reader accepts.
inline std::string config_echo(const CLI::App& app) {
  std::ostringstream os;
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_lnames().empty() ? "" : opt->get_lnames().front();
    if (name.empty() || name == "help" || name == "config" || name == "out" || name == "version" || name == "manifest")
      continue;
    std::vector<std::string> res;
    if (opt->count() > 0) res = opt->reduced_results();
    else if (!opt->get_default_str().empty() && opt->get_type_size() != 0) res = {opt->get_default_str()};
    if (res.empty()) continue;
    os << name << " = ";
    if (opt->get_expected_max() > 1) {
      os << "[";
      for (std::size_t i = 0; i < res.size(); ++i) os << (i ? ", " : "") << '"' << res[i] << '"';
      os << "]";
    } else if (opt->get_type_size() == 0) {
      os << (res.front() == "0" || res.front() == "false" ? "false" : "true");
    } else {
      os << '"' << res.front() << '"';
    }
    os << "\n";
  }
  return os.str();
}

inline int rerun(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::ifstream in(cfg.manifest);
  if (!in) throw ValidationError("cannot read manifest " + cfg.manifest);
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  if (!m.contains("subcommand") || !m.contains("config") || !m.contains("payloads"))
    throw ValidationError("manifest lacks subcommand, config or payloads");
  auto tmp = std::filesystem::temp_directory_path() /
             ("bohrgap-rerun-" + std::to_string(std::hash<std::string>{}(cfg.manifest + m.dump())) + ".toml");
  write_file(tmp, m["config"].get<std::string>());
  std::vector<std::string> args;
  std::istringstream sub(m["subcommand"].get<std::string>());
  for (std::string w; sub >> w;) args.push_back(w);
  args.push_back("--config");
  args.push_back(tmp.string());
  std::filesystem::path dir = cfg.out;
  bool scratch = dir.empty();
  if (scratch) dir = tmp.string() + ".d";
  args.push_back("--out");
  args.push_back(dir.string());
  std::ostringstream sink;
  int code = run(args, sink, err);
  std::filesystem::remove(tmp);
  if (code != 0) {
    if (scratch) std::filesystem::remove_all(dir);
    return code;
  }
  std::ifstream fresh_in(dir / "manifest.json");
  nlohmann::json fresh = nlohmann::json::parse(fresh_in);
  if (scratch) std::filesystem::remove_all(dir);
  bool same = true;
  for (const auto& [name, hash] : m["payloads"].items()) {
    bool ok = fresh["payloads"].contains(name) && fresh["payloads"][name] == hash;
    out << name << ": " << (ok ? "identical" : "DIFFERS") << "\n";
    same = same && ok;
  }
  same = same && fresh["payloads"].size() == m["payloads"].size();
  if (!same) throw ReproMismatch("payloads differ from " + cfg.manifest);
  return 0;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Bohr sets, GAP structure, restricted sums and exponent estimates"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value config file mirroring the flags");
  app.set_version_flag("--version", std::string(kVersion));

  app.add_option("--k", cfg.k, "rank k (alpha has k-1 entries); inferred when omitted");
  app.add_option("--alpha", cfg.alpha, "alpha constructors: rat:p/q, sqrt:m, dec:<decimal>")->delimiter(',');
  app.add_option("--gamma", cfg.gamma, "gamma constructors (default 0)")->delimiter(',');
  app.add_option("--delta", cfg.delta, "delta values (one value applies to all)")->delimiter(',');
  app.add_option("--N", cfg.N, "range N")->check(CLI::PositiveNumber);
  app.add_option("--eps", cfg.eps, "epsilon as p/q or decimal")->capture_default_str();
  app.add_option("--scale", cfg.scale, "fixed-point scale in bits")->check(CLI::Range(64u, 4096u))->capture_default_str();
  app.add_option("--seed", cfg.seed, "generator seed")->capture_default_str();
  app.add_option("--budget", cfg.budget, "enumeration budget")->capture_default_str();
  app.add_option("--out", cfg.out, "output directory for payloads and manifest");
  app.add_flag("--no-restrict", cfg.no_restrict, "drop the support restriction");
  app.add_option("--mode", cfg.mode, "bohr: enumerate, lift or restrict")->capture_default_str();
  app.add_option("--range", cfg.range, "bohr: symmetric or positive")->capture_default_str();
  app.add_option("--Ck", cfg.ck, "gap outer: constant C_k (default 10 k^(k/2) iota)");
  app.add_option("--gap", cfg.gap_file, "gap verify: GAP JSON file");
  app.add_option("--A", cfg.A, "count davenport: congruence coefficients")->delimiter(',');
  app.add_option("--p", cfg.p, "count davenport: prime modulus")->capture_default_str();
  app.add_option("--lo", cfg.lo, "count davenport: box lower corner")->delimiter(',');
  app.add_option("--hi", cfg.hi, "count davenport: box upper corner")->delimiter(',');
  app.add_option("--pmax", cfg.pmax, "count alphap: largest prime")->capture_default_str();
  app.add_option("--checkpoints", cfg.checkpoints, "sums, experiment: checkpoints (default powers of 10)")->delimiter(',');
  app.add_option("--psi", cfg.psi, "divergent, convergent or power")->capture_default_str();
  app.add_option("--psi-c", cfg.psi_c, "psi constant")->capture_default_str();
  app.add_option("--psi-s", cfg.psi_s, "psi power exponent")->capture_default_str();
  app.add_option("--eta", cfg.eta, "sums dscheck: eta for the split identity")->capture_default_str();
  app.add_option("--samples", cfg.samples, "experiment: number of samples")->capture_default_str();
  app.add_option("--horizon", cfg.horizon, "exponents: n horizon")->capture_default_str();
  app.add_option("--hmax", cfg.hmax, "exponents: dual horizon")->capture_default_str();
  app.add_option("--nmin", cfg.nmin, "exponents: burn-in start")->capture_default_str();
  app.add_option("--xlist", cfg.xlist, "exponents: X values for the uniform proxy")->delimiter(',');
  app.add_option("--manifest", cfg.manifest, "rerun: manifest to replay");

  std::vector<Command> commands;
  std::vector<std::pair<CLI::App*, std::size_t>> leaves;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc, const std::string& path,
                  std::function<Payloads(const RunConfig&, std::ostream&)> fn) {
    CLI::App* a = parent->add_subcommand(name, desc);
    a->fallthrough();
    commands.push_back({path, std::move(fn)});
    leaves.emplace_back(a, commands.size() - 1);
    return a;
  };
  auto group = [&](const std::string& name, const std::string& desc) {
    CLI::App* g = app.add_subcommand(name, desc);
    g->fallthrough();
    g->require_subcommand(1);
    return g;
  };
  leaf(&app, "bohr", "enumerate, lift or restrict a Bohr set", "bohr", run_bohr);
  leaf(&app, "minima", "reduced successive minima of the body S", "minima", run_minima);
  CLI::App* gap = group("gap", "GAP structure");
  leaf(gap, "inner", "inner GAP inside the Bohr set", "gap inner", run_gap_inner);
  leaf(gap, "outer", "outer GAP covering the homogeneous Bohr set", "gap outer", run_gap_outer);
  leaf(gap, "verify", "verify a GAP JSON against a Bohr set", "gap verify", run_gap_verify);
  CLI::App* count = group("count", "lattice and totient counting");
  leaf(count, "davenport", "congruence lattice count against the Davenport bound", "count davenport", run_count_davenport);
  leaf(count, "alphap", "densities alpha_p over the inner GAP", "count alphap", run_count_alphap);
  leaf(count, "totient", "average of phi over the (restricted) Bohr set", "count totient", run_count_totient);
  CLI::App* sums = group("sums", "restricted reciprocal sums");
  leaf(sums, "t", "T_N and T*_N at checkpoints", "sums t", run_sums_t);
  leaf(sums, "dyadic", "dyadic decomposition of T_N", "sums dyadic", run_sums_dyadic);
  leaf(sums, "dscheck", "Duffin-Schaeffer hypothesis ratios", "sums dscheck", run_sums_dscheck);
  leaf(&app, "exponents", "finite-horizon exponent estimates", "exponents", run_exponents);
  CLI::App* exp = group("experiment", "Monte-Carlo experiments");
  leaf(exp, "gallagher", "fibre Gallagher experiment", "experiment gallagher", run_gallagher);
  CLI::App* rerun_cmd = app.add_subcommand("rerun", "replay a manifest and compare payloads");
  rerun_cmd->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (rerun_cmd->parsed()) {
      if (cfg.manifest.empty()) throw ValidationError("rerun needs --manifest FILE");
      return detail::rerun(cfg, out, err);
    }
    const Command* cmd = nullptr;
    for (const auto& [a, i] : leaves)
      if (a->parsed()) cmd = &commands[i];
    if (!cmd) throw ValidationError("choose a subcommand");
    auto t0 = std::chrono::steady_clock::now();
    Payloads payloads = cmd->action(cfg, out);
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& [name, body] : payloads) hashes[name] = "fnv1a64:" + detail::hex64(detail::fnv1a_bytes(body));
    if (!cfg.out.empty()) {
      std::filesystem::path dir(cfg.out);
      std::filesystem::create_directories(dir);
      for (const auto& [name, body] : payloads) detail::write_file(dir / name, body);
      nlohmann::json manifest = {{"tool", "bohrgap"},
                                 {"version", kVersion},
                                 {"subcommand", cmd->path},
                                 {"config", detail::config_echo(app)},
                                 {"payloads", hashes},
                                 {"timings", {{"elapsed_seconds", elapsed}}}};
      detail::write_file(dir / "manifest.json", detail::dump(manifest));
      out << "wrote " << payloads.size() << " payload(s) and manifest.json to " << dir.string() << "\n";
    }
    return 0;
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

}  // namespace bohrgap::cli
