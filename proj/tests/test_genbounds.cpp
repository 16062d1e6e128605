#include <gtest/gtest.h>

#include <cmath>

#include "dualgap/errors.hpp"
#include "dualgap/genbounds.hpp"
#include "oracles.hpp"

using namespace dualgap;

TEST(Rate, PointMassIsZero) {
  const auto c = empirical_ipm_curve(SampledDistributionSpec::parse("point-mass"), {1, 10, 100}, 5, 1);
  for (const auto& r : c.rows) EXPECT_EQ(r.ipm, 0);
  EXPECT_FALSE(c.fitted);
}

TEST(Rate, TwoPointMatchesBinomialOracle) {
  const std::vector<std::size_t> ns{10, 30, 100, 300, 1000, 3000, 10000};
  const std::size_t trials = 500;
  const auto c = empirical_ipm_curve(SampledDistributionSpec::two_point(), ns, trials, 7);
  ASSERT_TRUE(c.fitted);
  EXPECT_NEAR(c.slope, -0.5, 0.1);
  EXPECT_EQ(c.rows.size(), ns.size() * trials);
  for (std::size_t k = 0; k < ns.size(); ++k) {
    double mean = 0, sq = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double v = c.rows[k * trials + t].ipm;
      mean += v, sq += v * v;
    }
    mean /= trials;
    const double se = std::sqrt((sq / trials - mean * mean) / trials);
    EXPECT_NEAR(mean, oracle::binomial_mean_abs_deviation(ns[k]), 4 * se + 1e-12) << "n=" << ns[k];
  }
  // Exact expectations fall at rate −½ too.
  const double s = std::log(oracle::binomial_mean_abs_deviation(10000) / oracle::binomial_mean_abs_deviation(100)) /
                   std::log(100.0);
  EXPECT_NEAR(s, -0.5, 0.01);
}

TEST(Rate, MediansMonotoneWithOneInversion) {
  const auto c = empirical_ipm_curve(SampledDistributionSpec::uniform_grid(6), {10, 40, 160, 640}, 30, 3);
  int inversions = 0;
  for (std::size_t k = 1; k < c.medians.size(); ++k) inversions += c.medians[k] > c.medians[k - 1];
  EXPECT_LE(inversions, 1);
  for (const auto& r : c.rows) EXPECT_NEAR(r.bound_term, mcdiarmid_term(2.0, r.n, 0.1), 1e-15);
}

TEST(Rate, Validation) {
  const auto s = SampledDistributionSpec::two_point();
  EXPECT_THROW(empirical_ipm_curve(s, {10, 10}, 5, 0), InputError);
  EXPECT_THROW(empirical_ipm_curve(s, {10}, 1, 0), InputError);
  EXPECT_THROW(empirical_ipm_curve(s, {}, 5, 0), InputError);
  EXPECT_THROW(SampledDistributionSpec::parse("gaussian"), InputError);
}

TEST(Rate, Deterministic) {
  const auto s = SampledDistributionSpec::uniform_square(16);
  const auto a = empirical_ipm_curve(s, {50, 200}, 6, 11), b = empirical_ipm_curve(s, {50, 200}, 6, 11);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].ipm, b.rows[i].ipm);
}

TEST(Concentration, McDiarmidTerm) {
  EXPECT_NEAR(mcdiarmid_term(2, 50, 0.1), std::sqrt(2.0 / 50 * std::log(10.0)), 1e-15);
}

TEST(Concentration, TwoPoint) {
  const auto r = concentration_check(SampledDistributionSpec::two_point(), 1000, 500, 0.1, 5);
  EXPECT_TRUE(r.pass);
  // Exact chance that |p̂ − ½| exceeds the threshold, for the observed mean.
  const double p = oracle::binomial_deviation_tail(1000, r.mean + r.bound_term);
  EXPECT_LE(p, 0.1);
  EXPECT_NEAR(r.violation_fraction, p, 4 * std::sqrt(std::max(p, 1e-4) / 500) + 1e-12);
  const auto half = concentration_check(SampledDistributionSpec::two_point(), 100, 200, 0.5, 6);
  EXPECT_LE(half.violation_fraction, 0.5 + 2 * std::sqrt(0.25 / 200));
  EXPECT_THROW(concentration_check(SampledDistributionSpec::two_point(), 10, 10, 1.0, 0), InputError);
}

TEST(Covering, Examples) {
  Matrix one(1, 2);
  one << 0.3, 0.4;
  const auto a = covering_number(one, 0.1);
  EXPECT_EQ(a.upper, 1u);
  EXPECT_EQ(a.lower, 1u);
  Matrix two(2, 1);
  two << 0, 3;
  const auto b = covering_number(two, 1);
  EXPECT_EQ(b.upper, 2u);
  EXPECT_EQ(b.lower, 2u);
  Matrix grid(100, 2);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) grid(10 * i + j, 0) = i / 9.0, grid(10 * i + j, 1) = j / 9.0;
  const auto g = covering_number(grid, 0.5);
  EXPECT_LE(g.upper, 9u);
  // Opposite corners are more than 2η apart.
  EXPECT_GE(g.lower, 2u);
  EXPECT_LE(g.lower, g.upper);
  const auto big = covering_number(grid, 1.5);
  EXPECT_EQ(big.upper, 1u);
  EXPECT_EQ(big.lower, 1u);
  EXPECT_THROW(covering_number(grid, 0), InputError);
}

TEST(Covering, UpperAtLeastLower) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    Matrix p(30, 2);
    for (int i = 0; i < 30; ++i) p(i, 0) = rng.uniform(), p(i, 1) = rng.uniform();
    const auto b = covering_number(p, rng.uniform(0.05, 0.5));
    EXPECT_GE(b.upper, b.lower);
  }
}

TEST(Dimension, Profiles) {
  const auto pm = covering_dimension_profile(SampledDistributionSpec::parse("point-mass"), {0.5, 0.1}, 0, 50, 1);
  for (const auto& r : pm.rows) {
    EXPECT_EQ(r.cover_size, 1u);
    EXPECT_EQ(r.dimension, 0);
  }
  const auto tp = covering_dimension_profile(SampledDistributionSpec::two_point(), {0.25}, 0, 200, 2);
  EXPECT_EQ(tp.rows[0].cover_size, 2u);
  EXPECT_NEAR(tp.rows[0].dimension, 0.5, 1e-15);
  const auto sq = covering_dimension_profile(SampledDistributionSpec::uniform_square(32), {0.2, 0.1, 0.05}, 0.01, 2000, 3);
  EXPECT_GT(sq.d_star_estimate, 1.0);
  EXPECT_LT(sq.d_star_estimate, 2.5);
  EXPECT_THROW(covering_dimension_profile(SampledDistributionSpec::two_point(), {1.5}, 0, 10, 0), InputError);
}

TEST(Theorem4, TwoPointTv) {
  Matrix a(2, 1);
  a << 0, 1;
  const auto sx = SampledDistributionSpec::mixture(a, (Vector(2) << 0.5, 0.5).finished());
  const auto sg = SampledDistributionSpec::mixture(a, (Vector(2) << 0.2, 0.8).finished());
  const auto tv = FGenerator::builtin("tv");
  const auto r = verify_theorem4_structure(sx, sg, tv, 1.0, {10, 100, 1000, 10000}, 100, 0.1, 4);
  EXPECT_TRUE(r.two_sided);
  EXPECT_NEAR(r.lhs, 0.3, 1e-9);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.inversions, 1u);
  EXPECT_LE(r.median_negative_slack.back(), 1e-2);
}

TEST(Theorem4, IdenticalAndDisjoint) {
  const auto tv = FGenerator::builtin("tv");
  const auto s = SampledDistributionSpec::two_point();
  const auto same = verify_theorem4_structure(s, s, tv, 1.0, {10, 100}, 20, 0.1, 5);
  EXPECT_EQ(same.lhs, 0);
  for (const auto& row : same.rows) EXPECT_GE(row.slack, -1e-9);
  Matrix ax(2, 1), ag(2, 1);
  ax << 0, 1;
  ag << 2, 3;
  const auto sx = SampledDistributionSpec::mixture(ax, Vector::Constant(2, 0.5));
  const auto sg = SampledDistributionSpec::mixture(ag, Vector::Constant(2, 0.5));
  const auto d = verify_theorem4_structure(sx, sg, tv, 1.0, {5, 50}, 10, 0.1, 6);
  EXPECT_TRUE(d.rhs_finite);
  for (const auto& row : d.rows) EXPECT_TRUE(std::isfinite(row.rhs));
  const auto kl = verify_theorem4_structure(s, s, FGenerator::builtin("kl"), 1.0, {10, 100}, 10, 0.1, 7);
  EXPECT_FALSE(kl.two_sided);
  EXPECT_THROW(verify_theorem4_structure(s, SampledDistributionSpec::uniform_grid(3), tv, 1, {10}, 2, 0.1, 0),
               InputError);
}
