#include <gtest/gtest.h>

#include <random>

#include "bohrgap/gap.hpp"

using namespace bohrgap;

namespace {

BohrSpec make(std::vector<std::string> alpha, std::vector<std::string> gamma, std::int64_t N,
              std::vector<std::string> delta, std::string eps = "0.05") {
  BohrSpec s;
  for (auto& a : alpha) s.alpha.alphas.push_back(parse_real(a));
  for (auto& g : gamma) s.gamma.push_back(parse_real(g));
  for (auto& d : delta) s.delta.push_back(parse_real(d));
  s.N = N;
  s.epsilon = FixedReal::parse_decimal(eps);
  return s;
}

// Independent membership oracle: exact rational/FixedReal evaluation per n.
bool oracle_member(const BohrSpec& s, std::int64_t n) {
  if (n < -s.N || n > s.N) return false;
  for (std::size_t i = 0; i < s.alpha.d(); ++i) {
    FixedReal d = norm_form(n, s.alpha.alphas[i], s.gamma[i]);
    if (!certified_le(d, s.delta[i])) return false;
  }
  return true;
}

}  // namespace

TEST(Gap, ProperExamples) {
  GAP a{GapForm::positive, 0, {2, 3}, {2, 2}, {}, {}};
  auto ca = is_proper(a);
  EXPECT_TRUE(ca.proper);
  EXPECT_EQ(ca.count, 4u);
  GAP b{GapForm::positive, 0, {1, 1}, {2, 2}, {}, {}};
  auto cb = is_proper(b);
  EXPECT_FALSE(cb.proper);
  ASSERT_TRUE(cb.collision.has_value());
  auto [x, y] = *cb.collision;
  EXPECT_EQ(x[0] + x[1], y[0] + y[1]);
  EXPECT_NE(x, y);
}

TEST(Gap, Elements) {
  GAP a{GapForm::positive, 1, {2}, {3}, {}, {}};
  auto e = gap_elements(a);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0].value, 3);
  EXPECT_EQ(e[2].value, 7);
  GAP s{GapForm::symmetric, 0, {1}, {2}, {}, {}};
  auto f = gap_elements(s);
  ASSERT_EQ(f.size(), 5u);
  EXPECT_EQ(f.front().value, -2);
  EXPECT_EQ(f.back().value, 2);
  GAP big{GapForm::positive, 0, {1, 1, 1}, {1000, 1000, 1000}, {}, {}};
  EXPECT_THROW(gap_elements(big, 1000000), BudgetExceeded);
}

TEST(Gap, DecomposeRoundTrip) {
  IMat basis{{12, 17}, {5, 7}};
  EXPECT_EQ(decompose(basis, {12, 17}), (IVec{1, 0}));
  EXPECT_EQ(decompose(basis, {0, 0}), (IVec{0, 0}));
  IMat b3{{1, 2, 3}, {0, 1, 4}, {0, 0, 1}};
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    IVec p{static_cast<std::int64_t>(rng() % 200) - 100, static_cast<std::int64_t>(rng() % 200) - 100,
           static_cast<std::int64_t>(rng() % 200) - 100};
    IVec c = decompose(b3, p);
    IVec back(3, 0);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) back[j] += c[i] * b3[i][j];
    EXPECT_EQ(back, p);
  }
}

TEST(Gap, InnerSqrt2) {
  auto s = make({"sqrt:2"}, {"0"}, 100000, {"0.1"});
  InnerResult r = inner_gap(s);
  ASSERT_EQ(r.status, GapStatus::ok) << r.diagnostic;
  EXPECT_TRUE(r.verified());
  const GAP& g = *r.gap;
  // Pinned from the first run; verified against the oracle below.
  EXPECT_EQ(g.moduli, (IVec{408, 985}));
  EXPECT_EQ(g.lengths, (IVec{5, 5}));
  EXPECT_EQ(g.sigma, (std::vector<int>{1, 1}));
  EXPECT_EQ(r.b0, 169);
  EXPECT_EQ(r.s, 2378);
  EXPECT_EQ(g.base, 2547);
  EXPECT_TRUE(g.proper->proper);
  for (auto e : gap_elements(g)) {
    EXPECT_TRUE(oracle_member(s, e.value)) << e.value;
    EXPECT_GE(e.value, 1);
    EXPECT_LE(e.value, s.N);
  }
  EXPECT_EQ(gap_elements(g).size(), 25u);
}

TEST(Gap, InnerRationalFails) {
  auto s = make({"rat:1/2"}, {"0"}, 100000, {"0.1"});
  InnerResult r = inner_gap(s);
  EXPECT_NE(r.status, GapStatus::ok);
}

TEST(Gap, InnerHypothesis) {
  EXPECT_THROW(inner_gap(make({"sqrt:2"}, {"0"}, 100000, {"1.5"})), ValidationError);
  EXPECT_FALSE(inner_gap(make({"sqrt:2"}, {"0"}, 100000, {"0.1"})).hypothesis_ok);
  EXPECT_TRUE(inner_gap(make({"sqrt:2"}, {"0"}, 100000, {"0.6"})).hypothesis_ok);
}

// At delta = 0.2 the volume bound forces prod N_i ~ 1, so the rank-3 example
// ends on the documented underflow path.
TEST(Gap, InnerRank3Underflow) {
  auto s = make({"sqrt:2", "sqrt:3"}, {"0.3", "0.7"}, 1000000, {"0.2", "0.2"}, "0.04");
  InnerResult r = inner_gap(s);
  EXPECT_EQ(r.status, GapStatus::length_underflow);
  ASSERT_TRUE(r.gap);
  EXPECT_EQ(r.gap->moduli, (IVec{16477, 4109, 19123}));
  EXPECT_EQ(r.gap->lengths, (IVec{2, 1, 0}));
}

TEST(Gap, InnerRank3) {
  auto s = make({"sqrt:2", "sqrt:3"}, {"0.3", "0.7"}, 1000000, {"1", "1"}, "0.04");
  InnerResult r = inner_gap(s);
  ASSERT_EQ(r.status, GapStatus::ok) << r.diagnostic;
  EXPECT_TRUE(r.verified());
  EXPECT_TRUE(r.hypothesis_ok);
  EXPECT_EQ(r.gap->moduli, (IVec{4109, 2646, 8259}));
  EXPECT_EQ(r.gap->lengths, (IVec{8, 3, 3}));
  EXPECT_EQ(r.b0, 61);
  EXPECT_EQ(r.s, 4109);
  EXPECT_EQ(r.gap->base, 4170);
  for (auto e : gap_elements(*r.gap)) ASSERT_TRUE(oracle_member(s, e.value)) << e.value;
}

TEST(Gap, OuterSqrt2) {
  auto s = make({"sqrt:2"}, {"0"}, 10000, {"0.3"});
  OuterResult r = outer_gap(s);
  EXPECT_TRUE(r.contained);
  EXPECT_GT(r.lifted_points, 0u);
  // Oracle: every member decomposes within the lengths.
  for (std::int64_t n = -s.N; n <= s.N; ++n) {
    if (!oracle_member(s, n)) continue;
    IVec p{n, nearest_int(mpz_class(static_cast<long>(n)) * s.alpha.alphas[0]).get_si()};
    IVec c = decompose(r.minima, p);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_LE(std::abs(c[i]), r.gap.lengths[i]);
  }
}

TEST(Gap, OuterWideDelta) {
  auto s = make({"sqrt:3"}, {"0"}, 2000, {"2"});
  OuterResult r = outer_gap(s);
  EXPECT_TRUE(r.contained);
  EXPECT_GE(r.lifted_points, 4001u);
  auto s2 = make({"sqrt:2"}, {"0.1"}, 2000, {"0.5"});
  EXPECT_THROW(outer_gap(s2), ValidationError);
}

TEST(Gap, OuterRank3) {
  auto s = make({"sqrt:2", "sqrt:3"}, {"0", "0"}, 100000, {"0.5", "0.5"});
  OuterResult r = outer_gap(s);
  EXPECT_TRUE(r.contained);
  EXPECT_GT(r.size_ratio, 0);
}

TEST(Gap, Cardinality) {
  auto s = make({"rat:1/2"}, {"0"}, 100, {"0.3"});
  CardinalityReport c = cardinality_ratio(s);
  EXPECT_EQ(c.count, 101u);
  EXPECT_EQ(c.ratio, mpq_class(101, 30));
  EXPECT_TRUE(c.injection_ok);
  auto t = make({"sqrt:2", "sqrt:5"}, {"0.3", "0.7"}, 20000, {"0.2", "0.3"});
  CardinalityReport d = cardinality_ratio(t);
  EXPECT_TRUE(d.injection_ok);
  EXPECT_TRUE(d.symmetric_injection_ok);
}
