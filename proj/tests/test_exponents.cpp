#include <gtest/gtest.h>

#include "bohrgap/exponents.hpp"

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

}  // namespace

// Oracle values from tests/oracles/exponents_oracle.py.
TEST(Exponents, MultSqrt2) {
  auto e = mult_exponent_est(tv({"sqrt:2"}), reals({"0"}), 10000);
  ASSERT_TRUE(e.value);
  EXPECT_NEAR(static_cast<double>(*e.value), 2.5431066063272239, 1e-12);
  EXPECT_EQ(e.argmax, (std::vector<std::int64_t>{2}));
  auto b = mult_exponent_est(tv({"sqrt:2"}), reals({"0"}), 10000, 1000);
  EXPECT_NEAR(static_cast<double>(*b.value), 1.1337430893319542, 1e-12);
  EXPECT_EQ(b.argmax, (std::vector<std::int64_t>{2378}));
}

TEST(Exponents, RationalWitness) {
  auto e = mult_exponent_est(tv({"rat:1/2"}), reals({"0"}), 10);
  EXPECT_TRUE(e.infinite());
  EXPECT_FALSE(e.value);
  EXPECT_EQ(e.infinity_witness, (std::vector<std::int64_t>{2}));
  auto t = mult_exponent_est(tv({"rat:1/3"}), reals({"0"}), 10);
  EXPECT_EQ(t.infinity_witness, (std::vector<std::int64_t>{3}));
  auto u = uniform_inhom_exponent_est(tv({"rat:1/2"}), reals({"0"}), {10, 100});
  EXPECT_TRUE(u.overall.infinite());
  EXPECT_EQ(u.overall.infinity_witness, (std::vector<std::int64_t>{2}));
  auto d = dual_exponent_est(tv({"rat:1/2", "sqrt:2"}), 4);
  EXPECT_TRUE(d.infinite());
}

TEST(Exponents, Rank2Scans) {
  auto a = tv({"sqrt:2", "sqrt:3"});
  auto m = mult_exponent_est(a, reals({"0", "0"}), 100000);
  EXPECT_NEAR(static_cast<double>(*m.value), 3.6505939829196376, 1e-12);
  auto s = simult_exponent_est(a, 100000);
  EXPECT_NEAR(static_cast<double>(*s.value), 1.2890567476502521, 1e-12);
  auto sb = simult_exponent_est(a, 100000, 10000);
  EXPECT_NEAR(static_cast<double>(*sb.value), 0.62196734129795705, 1e-12);
  EXPECT_EQ(sb.argmax, (std::vector<std::int64_t>{20586}));
  EXPECT_GE(*sb.value, 0.4L);  // Dirichlet side
  auto d = dual_exponent_est(a, 200);
  EXPECT_NEAR(static_cast<double>(*d.value), 4.4884580997996437, 1e-12);
  EXPECT_EQ(d.argmax, (std::vector<std::int64_t>{5, 4}));
}

TEST(Exponents, UniformProxy) {
  auto u = uniform_inhom_exponent_est(tv({"sqrt:2"}), reals({"rat:1/3"}), {1000, 10000, 100000});
  EXPECT_NEAR(static_cast<double>(*u.overall.value), 1.0768871711907547, 1e-12);
  EXPECT_NEAR(static_cast<double>(*u.per_x[0]), 1.1797755791408557, 1e-12);
  EXPECT_GE(*u.overall.value, 0.8L);
  auto v = uniform_inhom_exponent_est(tv({"sqrt:2", "sqrt:3"}), reals({"0", "0"}), {1000, 10000, 100000});
  EXPECT_NEAR(static_cast<double>(*v.overall.value), 0.53658017774158162, 1e-12);
  EXPECT_GE(*v.overall.value, 0.3L);
}

TEST(Exponents, CollapseAtDimensionOne) {
  auto a = tv({"sqrt:2"});
  for (std::uint64_t n_min : {2ULL, 50ULL}) {
    auto m = mult_exponent_est(a, reals({"0"}), 5000, n_min);
    auto s = simult_exponent_est(a, 5000, n_min);
    auto d = dual_exponent_est(a, 5000, n_min);
    EXPECT_EQ(*m.value, *s.value);
    EXPECT_EQ(*s.value, *d.value);
    EXPECT_EQ(m.argmax, d.argmax);
  }
}

TEST(Exponents, Monotone) {
  auto a = tv({"sqrt:5"});
  long double prev = -1;
  for (std::uint64_t h : {10ULL, 100ULL, 1000ULL, 10000ULL}) {
    long double v = *simult_exponent_est(a, h).value;
    EXPECT_GE(v, prev);
    prev = v;
  }
  std::vector<std::uint64_t> xs{100, 1000};
  long double before = *uniform_inhom_exponent_est(a, reals({"0.3"}), xs).overall.value;
  xs.push_back(10000);
  long double after = *uniform_inhom_exponent_est(a, reals({"0.3"}), xs).overall.value;
  EXPECT_LE(after, before);
}

TEST(Exponents, Deterministic) {
  auto a = tv({"sqrt:2", "sqrt:5"});
  TransferenceHorizons hz;
  hz.n_max = 5000;
  hz.h_max = 60;
  hz.x_list = {100, 1000};
  EXPECT_EQ(to_json(transference_report(a, reals({"0", "0"}), hz)).dump(),
            to_json(transference_report(a, reals({"0", "0"}), hz)).dump());
}

TEST(Exponents, TransferenceSqrt2) {
  TransferenceHorizons hz;
  hz.n_max = 1000000;
  hz.h_max = 1000000;
  hz.n_min = 100000;
  hz.x_list = {1000, 10000, 100000, 1000000};
  auto r = transference_report(tv({"sqrt:2"}), reals({"0"}), hz);
  EXPECT_FALSE(r.degenerate);
  for (auto v : {*r.omega.value, *r.omega_times.value, *r.omega_star.value, *r.omega_hat.overall.value}) {
    EXPECT_GE(v, 0.9L);
    EXPECT_LE(v, 1.1L);
  }
  EXPECT_TRUE(*r.mult_vs_simult);
  EXPECT_TRUE(*r.khintchine);
  EXPECT_TRUE(*r.bugeaud_laurent);
  EXPECT_TRUE(*r.main_hypothesis);
}

TEST(Exponents, TransferenceRational) {
  TransferenceHorizons hz;
  hz.n_max = 100;
  hz.h_max = 100;
  hz.x_list = {10, 100};
  auto r = transference_report(tv({"rat:1/2"}), reals({"0"}), hz);
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(*r.main_hypothesis);
  EXPECT_FALSE(r.khintchine);
  auto j = to_json(r);
  EXPECT_EQ(j["omega"]["value"], "inf");
}

TEST(Exponents, TransferenceRank2) {
  TransferenceHorizons hz;
  hz.n_max = 100000;
  hz.h_max = 300;
  hz.x_list = {1000, 10000, 100000};
  auto r = transference_report(tv({"sqrt:2", "sqrt:3"}), reals({"0", "0"}), hz);
  EXPECT_LE(2 * *r.omega.value, *r.omega_times.value + 0.1L);
}

TEST(Exponents, Guards) {
  EXPECT_THROW(mult_exponent_est(tv({"sqrt:2"}), reals({"0"}), 1), ValidationError);
  EXPECT_THROW(dual_exponent_est(tv({"sqrt:2", "sqrt:3", "sqrt:5", "sqrt:7"}), 10), GuardViolation);
  EXPECT_THROW(uniform_inhom_exponent_est(tv({"sqrt:2"}), reals({"0"}), {100, 50}), ValidationError);
  EXPECT_THROW(uniform_inhom_exponent_est(tv({"sqrt:2"}), reals({"0"}), {5}), ValidationError);
}
