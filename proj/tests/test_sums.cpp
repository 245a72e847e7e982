#include <gtest/gtest.h>

#include <sstream>

#include "bohrgap/sums.hpp"

using namespace bohrgap;

namespace {

TargetVector tv(std::initializer_list<const char*> a) {
  TargetVector t;
  for (auto x : a) t.alphas.push_back(parse_real(x));
  return t;
}

std::vector<FixedReal> reals(std::initializer_list<const char*> a) {
  std::vector<FixedReal> out;
  for (auto x : a) out.push_back(parse_real(x));
  return out;
}

const TotientTable& table() {
  static TotientTable t(200'000);
  return t;
}

}  // namespace

// ||n/3 - 1/2|| is 1/2 on multiples of 3 and 1/6 elsewhere; with threshold
// n^-1/2 the set is {3m : m >= 2} together with every n >= 36 (tie at 36).
TEST(Support, RationalBoundary) {
  auto m = support_mask(tv({"rat:1/3"}), reals({"rat:1/2"}), mpq_class(1, 4), 100);
  EXPECT_FALSE(m.test(1));
  EXPECT_FALSE(m.test(3));
  EXPECT_TRUE(m.test(6));
  EXPECT_FALSE(m.test(35));
  EXPECT_TRUE(m.test(36));
  EXPECT_TRUE(m.test(37));
  std::int64_t in = 0;
  for (std::int64_t n = 1; n <= 100; ++n) in += m.test(n);
  EXPECT_EQ(in, 10 + 65);  // 6..33 step 3, then 36..100
}

// Oracle: excluded_count in tests/oracles/sums_oracle.py.
TEST(Support, Sqrt2ExcludedCount) {
  auto m = support_mask(tv({"sqrt:2"}), reals({"0"}), mpq_class(1, 20), 100000);
  EXPECT_EQ(m.excluded(), 19619);
}

TEST(Sums, ExactRational) {
  auto m = SupportMask::trivial(9);
  auto p = t_sum(tv({"rat:1/3"}), reals({"rat:1/2"}), 9, m, &table());
  ASSERT_TRUE(p.T_exact && p.T_star_exact);
  EXPECT_EQ(*p.T_exact, mpq_class(42));
  EXPECT_EQ(*p.T_star_exact, mpq_class(2969, 105));
  EXPECT_NEAR(static_cast<double>(p.T), 42.0, 1e-15);
  EXPECT_NEAR(static_cast<double>(*p.T_star), 2969.0 / 105, 1e-14);
}

TEST(Sums, ZeroOnSupportRejected) {
  auto m = SupportMask::trivial(10);
  EXPECT_THROW(t_sum(tv({"rat:1/2"}), reals({"0"}), 10, m), GuardViolation);
}

// Oracle values from tests/oracles/sums_oracle.py.
TEST(Sums, Sqrt2Restricted) {
  auto a = tv({"sqrt:2"});
  auto g = reals({"0"});
  auto m = support_mask(a, g, mpq_class(1, 20), 10000);
  auto s = t_sums(a, g, m, {1000, 10000}, &table());
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_NEAR(static_cast<double>(s.points[0].T), 1269.6097219998669565, 1e-9);
  EXPECT_NEAR(static_cast<double>(*s.points[0].T_star), 768.74968548284141141, 1e-9);
  EXPECT_NEAR(static_cast<double>(s.points[1].T), 22876.456020668628672, 1e-8);
  EXPECT_NEAR(static_cast<double>(*s.points[1].T_star), 13897.642287983364004, 1e-8);
  EXPECT_LT(s.points[1].T_err, 1e-9L * s.points[1].T);
  auto full = t_sum(a, g, 10000, SupportMask::trivial(10000));
  EXPECT_NEAR(static_cast<double>(full.T), 192479.96094439838844, 1e-7);
}

TEST(Sums, Rank3Restricted) {
  auto a = tv({"sqrt:2", "sqrt:3"});
  auto g = reals({"rat:1/3", "0"});
  auto m = support_mask(a, g, mpq_class(1, 20), 10000);
  auto p = t_sum(a, g, 10000, m, &table());
  EXPECT_NEAR(static_cast<double>(p.T), 54034.70145334226631, 1e-7);
  EXPECT_NEAR(static_cast<double>(*p.T_star), 32857.521818768634947, 1e-7);
}

TEST(Sums, CsvHeader) {
  auto a = tv({"sqrt:2"});
  auto g = reals({"0"});
  auto m = support_mask(a, g, mpq_class(1, 20), 1000);
  auto s = t_sums(a, g, m, {}, &table());
  std::ostringstream os;
  write_sums_csv(os, s);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "N,T,T_star,ratio_T,ratio_star,eps,k");
  EXPECT_EQ(s.points.size(), 3u);  // 10, 100, 1000
}

TEST(Dyadic, Sandwich) {
  for (auto spec : {std::pair{"sqrt:2", "0"}, std::pair{"sqrt:5", "rat:1/7"}}) {
    auto a = tv({spec.first});
    auto g = reals({spec.second});
    auto m = support_mask(a, g, mpq_class(1, 20), 20000);
    auto t = dyadic_table(a, g, 20000, m);
    auto p = t_sum(a, g, 20000, m);
    EXPECT_TRUE(dyadic_sandwich(t, p, a.k()));
    std::uint64_t total = 0;
    for (const auto& [c, n] : t.cells) total += n;
    EXPECT_EQ(total, p.terms);
  }
  auto a = tv({"sqrt:2", "sqrt:3"});
  auto g = reals({"rat:1/3", "0"});
  auto m = support_mask(a, g, mpq_class(1, 20), 10000);
  EXPECT_TRUE(dyadic_sandwich(dyadic_table(a, g, 10000, m), t_sum(a, g, 10000, m), a.k()));
}

TEST(Dyadic, ExactPowersOfTwo) {
  // ||n/4|| takes 1/4 and 1/2: cells 2 and 1 (closed on the right).
  auto t = dyadic_table(tv({"rat:1/4"}), reals({"0"}), 7, SupportMask::trivial(7));
  EXPECT_EQ(t.zero_excluded, 1u);  // n = 4
  EXPECT_EQ(t.cells.at({1}), 2u);  // 2, 6
  EXPECT_EQ(t.cells.at({2}), 4u);  // 1, 3, 5, 7
  EXPECT_EQ(t.reconstruction, 2 * 2 + 4 * 4);
}

// Oracle: psi_partial_sum(3, 10**6) in tests/oracles/sums_oracle.py.
TEST(Psi, DivergentPartialSum) {
  auto d = ApproxFunction::divergent(3);
  Accumulator acc;
  for (std::int64_t n = 1; n <= 1000000; ++n) acc.add(d(n));
  EXPECT_NEAR(static_cast<double>(acc.value()), 1.0646535565649885891, 1e-13);
}

TEST(Psi, Families) {
  auto d = ApproxFunction::divergent(2);
  EXPECT_EQ(d(1), d(3));
  EXPECT_NEAR(static_cast<double>(d(100)), 1.0 / (100 * std::pow(std::log(100.0), 2)), 1e-15);
  EXPECT_EQ(d.classify(2), Series::divergent);
  EXPECT_EQ(d.classify(1), Series::convergent);
  EXPECT_EQ(ApproxFunction::convergent(2).classify(2), Series::convergent);
  EXPECT_EQ(ApproxFunction::power(mpq_class(3, 2)).classify(2), Series::convergent);
  EXPECT_EQ(ApproxFunction::power(1).classify(2), Series::divergent);
  EXPECT_TRUE(d.certify_decreasing(100000, 1));
  EXPECT_TRUE(ApproxFunction::convergent(2).certify_decreasing(100000, 1));
  EXPECT_THROW(ApproxFunction::table({1, 2}), ValidationError);
  auto t = ApproxFunction::table({mpq_class(1, 2), mpq_class(1, 4)});
  EXPECT_EQ(t(2), 0.25L);
  EXPECT_EQ(t(3), 0.0L);
  for (std::int64_t n : {1, 3, 10, 1000, 123457}) {
    auto [lo, hi] = d.enclosure(n);
    EXPECT_LE(lo, hi);
    EXPECT_NEAR(Exponent::mpq_to_ld(lo), d(n), 1e-17L * d(n) + 1e-30L);
    EXPECT_GT(hi - lo, -1);
  }
}

TEST(Psi, Modified) {
  auto a = tv({"sqrt:2"});
  auto g = reals({"0"});
  auto P = psi_modified(ApproxFunction::divergent(2), a, g, mpq_class(1, 20));
  auto m = support_mask(a, g, mpq_class(1, 20), 2000);
  for (std::int64_t n = 1; n <= 2000; ++n) {
    EXPECT_EQ(P.on_support(n), m.test(n));
    if (!m.test(n)) {
      EXPECT_EQ(P(n), 0.0L);
    }
  }
  std::int64_t n = 2;
  while (!m.test(n)) ++n;
  long double x = n * std::sqrt(2.0L);
  long double d = std::fabs(x - std::nearbyint(x));
  EXPECT_NEAR(static_cast<double>(P(n)), static_cast<double>(ApproxFunction::divergent(2)(n) / d), 1e-12);
}

TEST(DuffinSchaeffer, RatiosBounded) {
  auto a = tv({"sqrt:2"});
  auto g = reals({"0"});
  auto r = ds_hypothesis_check(ApproxFunction::divergent(2), a, g, mpq_class(1, 20), {1000, 10000, 100000}, table());
  EXPECT_TRUE(r.l_le_u);
  EXPECT_EQ(r.series, Series::divergent);
  for (const auto& p : r.points) {
    EXPECT_LE(p.L, p.U);
    EXPECT_GT(p.L_over_R, 0);
    EXPECT_NEAR(static_cast<double>(p.U - p.L), static_cast<double>(p.U_minus_L), 1e-9 * static_cast<double>(p.U));
  }
  EXPECT_LT(r.spread_L, 3);
  // Oracle values from tests/oracles/sums_oracle.py.
  EXPECT_NEAR(static_cast<double>(r.points[0].L_over_R), 0.030870243450074123444, 1e-12);
  EXPECT_NEAR(static_cast<double>(r.points[0].U_over_R), 0.049306592938970392163, 1e-12);
  EXPECT_NEAR(static_cast<double>(r.points[1].L_over_R), 0.046499051292117986639, 1e-12);
  EXPECT_NEAR(static_cast<double>(r.points[1].U_over_R), 0.075181841893740047507, 1e-12);
}

TEST(DuffinSchaeffer, Rank3Pinned) {
  TargetVector a;
  a.alphas = {parse_real("sqrt:2"), parse_real("sqrt:3")};
  auto r = ds_hypothesis_check(ApproxFunction::divergent(3), a, zeros(2), mpq_class(1, 20), {10000}, table());
  EXPECT_NEAR(static_cast<double>(r.points[0].L_over_R), 0.010046304029299847609, 1e-12);
  EXPECT_NEAR(static_cast<double>(r.points[0].U_over_R), 0.016508102108596601751, 1e-12);
}

TEST(EtaSplit, Identity) {
  BohrSpec s;
  s.alpha = tv({"sqrt:2"});
  s.gamma = reals({"0"});
  s.N = 100000;
  s.delta = reals({"rat:1/5"});
  auto r = eta_split_check(s, mpq_class(1, 2), table());
  EXPECT_TRUE(r.nested);
  EXPECT_TRUE(r.identity);
  EXPECT_GT(r.outer, r.inner);
  EXPECT_THROW(eta_split_check(s, 2, table()), ValidationError);
}

TEST(Gallagher, Deterministic) {
  auto a = tv({"sqrt:2"});
  auto g = reals({"0"});
  auto psi = ApproxFunction::divergent(2);
  auto r1 = gallagher_experiment(a, g, psi, 8, 20000, 42);
  auto r2 = gallagher_experiment(a, g, psi, 8, 20000, 42);
  ASSERT_EQ(r1.samples.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(r1.samples[i].alpha_bits, r2.samples[i].alpha_bits);
    EXPECT_EQ(r1.samples[i].hits, r2.samples[i].hits);
    EXPECT_EQ(r1.samples[i].first_witness, r2.samples[i].first_witness);
    // hit counts are cumulative
    for (std::size_t c = 1; c < r1.samples[i].hits.size(); ++c)
      EXPECT_GE(r1.samples[i].hits[c], r1.samples[i].hits[c - 1]);
  }
  auto r3 = gallagher_experiment(a, g, psi, 8, 20000, 43);
  EXPECT_NE(r1.samples[0].alpha_bits, r3.samples[0].alpha_bits);
  std::ostringstream os;
  write_experiment_csv(os, r1);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "sample_id,alpha_k,hits,first_witness,runmin");
}

TEST(Gallagher, DivergentHitsMore) {
  auto a = tv({"sqrt:2"});
  auto g = reals({"0"});
  auto div = gallagher_experiment(a, g, ApproxFunction::divergent(2), 16, 100000, 7);
  auto conv = gallagher_experiment(a, g, ApproxFunction::convergent(2), 16, 100000, 7);
  EXPECT_GT(div.hit_fraction, 0.5L);
  EXPECT_GE(div.median_hits.back(), conv.median_hits.back());
}
