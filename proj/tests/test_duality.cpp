#include <gtest/gtest.h>

#include <cmath>

#include "dualgap/duality.hpp"
#include "dualgap/errors.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dualgap;
using namespace testing_helpers;
using DD = DiscreteDistribution;

namespace {

const DiscreteDistribution kPX{0.7, 0.3}, kPG{0.4, 0.6};

PushforwardMap random_map(std::size_t nz, std::size_t nx, Rng& rng) {
  std::vector<std::size_t> m(nz);
  for (auto& v : m) v = rng.index(nx);
  return PushforwardMap(m, nx);
}

}  // namespace

TEST(Penalty, TwoPointTv) {
  const auto tv = FGenerator::builtin("tv");
  const auto s = two_point();
  const auto a = restricted_fgan(kPX, kPG, tv, 1.0, s);
  EXPECT_NEAR(a.value, 0.3, 1e-9);
  EXPECT_NEAR(a.q[0], 0.4, 1e-9);
  EXPECT_TRUE(a.converged);
  const auto b = restricted_fgan(kPX, kPG, tv, 0.25, s);
  EXPECT_NEAR(b.value, 0.15, 1e-9);
  EXPECT_NEAR(b.q[0], 0.7, 1e-9);
  // Oracle route for both.
  EXPECT_NEAR(oracle::penalty_grid(kPX.weights(), s.dist(), tv, 1.0, kPG.weights(), 1e-4).value, 0.3, 1e-9);
  EXPECT_NEAR(oracle::penalty_grid(kPX.weights(), s.dist(), tv, 0.25, kPG.weights(), 1e-4).value, 0.15, 1e-9);
}

TEST(Penalty, IndicatorAndIdenticalMarginals) {
  Rng rng(81);
  const auto ind = FGenerator::builtin("indicator");
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng.index(6);
    const auto s = random_metric(n, rng);
    const auto P = random_dist(n, rng), G = random_dist(n, rng);
    const auto sol = restricted_fgan(P, G, ind, 1 + rng.uniform(), s);
    EXPECT_EQ(sol.q, G.weights());
    EXPECT_NEAR(sol.value, wasserstein_primal(P, G, CostMatrix::from_space(s)).value, 1e-12);
    for (const auto& name : {"tv", "kl", "chi2", "js"})
      EXPECT_NEAR(restricted_fgan(P, P, FGenerator::builtin(name), 2.0, s).value, 0, 1e-9) << name;
  }
}

TEST(Penalty, MatchesGridOracle) {
  Rng rng(83);
  for (const auto& name : {"tv", "chi2", "kl", "indicator", "reverse-kl", "js", "gan"}) {
    const auto f = FGenerator::builtin(name);
    for (int t = 0; t < 12; ++t) {
      const std::size_t n = 1 + rng.index(4), m = 1 + rng.index(3);
      const auto P = random_dist(n, rng), R = random_dist(m, rng);
      const Matrix c = Matrix::NullaryExpr(n, m, [&] { return rng.uniform(); });
      const double lambda = rng.uniform(0.1, 2.0);
      const auto sol = solve_marginal_penalty({P, CostMatrix(c), f, lambda, R});
      const auto o = oracle::penalty_grid(P.weights(), c, f, lambda, R.weights(), m == 3 ? 2.5e-3 : 1e-4);
      EXPECT_NEAR(sol.value, o.value, 1e-4) << name;
      EXPECT_LE(sol.lower_bound, o.value + 1e-9) << name;
      EXPECT_TRUE(sol.converged) << name;
      EXPECT_NEAR(sol.value, MarginalPenaltyProblem({P, CostMatrix(c), f, lambda, R}).objective(sol.q), 1e-12);
      EXPECT_LE(sol.coupling.marginal_error(), 1e-9);
    }
  }
}

TEST(Penalty, ObjectiveIsConvexAlongSegments) {
  Rng rng(85);
  for (const auto& name : {"tv", "chi2", "kl", "js"}) {
    const auto f = FGenerator::builtin(name);
    for (int t = 0; t < 50; ++t) {
      const std::size_t n = 2 + rng.index(4), m = 2 + rng.index(4);
      const MarginalPenaltyProblem prob{random_dist(n, rng),
                                        CostMatrix(Matrix::NullaryExpr(n, m, [&] { return rng.uniform(); })), f,
                                        rng.uniform(0.1, 3), random_dist(m, rng)};
      const Vector a = random_weights(m, rng), b = random_weights(m, rng);
      EXPECT_LE(prob.objective(0.5 * (a + b)), 0.5 * (prob.objective(a) + prob.objective(b)) + 1e-12);
    }
  }
}

TEST(Penalty, ReferenceZeros) {
  // Finite recession (TV) may put mass where the reference has none; KL may not.
  const auto s = two_point(0.1);
  const DiscreteDistribution P{0.0, 1.0}, R{1.0, 0.0};
  const auto tv = restricted_fgan(P, R, FGenerator::builtin("tv"), 1.0, s);
  EXPECT_NEAR(tv.value, 0.1, 1e-9);
  const auto kl = restricted_fgan(P, R, FGenerator::builtin("kl"), 1.0, s);
  EXPECT_EQ(kl.q[1], 0);
  EXPECT_NEAR(kl.value, 0.1, 1e-9);
}

TEST(Penalty, MirrorDescentIsClose) {
  Rng rng(87);
  SolverConfig md;
  md.method = SolverMethod::MirrorDescent;
  for (int t = 0; t < 10; ++t) {
    const auto s = random_metric(4, rng);
    const auto P = random_dist(4, rng), G = random_dist(4, rng);
    const auto f = FGenerator::builtin("chi2");
    const auto a = restricted_fgan(P, G, f, 1.0, s);
    const auto b = restricted_fgan(P, G, f, 1.0, s, md);
    EXPECT_EQ(b.method, "mirror-descent");
    EXPECT_GE(b.value, a.value - 1e-9);
    EXPECT_NEAR(b.value, a.value, 2e-2);
  }
}

TEST(Penalty, WeightedCostSubstitution) {
  Rng rng(89);
  const auto f = FGenerator::builtin("chi2");
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 3, m = 3;
    const auto P = random_dist(n, rng), R = random_dist(m, rng);
    const Matrix c = Matrix::NullaryExpr(n, m, [&] { return rng.uniform(); });
    const double gamma = rng.uniform(0.5, 4), lambda = rng.uniform(0.2, 2);
    const MarginalPenaltyProblem weighted{P, CostMatrix(gamma * c), f, lambda, R};
    const Vector q = random_weights(m, rng);
    EXPECT_NEAR(weighted.objective(q),
                gamma * wasserstein_primal(P.weights(), q, c).value + lambda * f_divergence(q, R.weights(), f),
                1e-12);
    const double a = solve_marginal_penalty(weighted).value;
    const double b = gamma * solve_marginal_penalty({P, CostMatrix(c), f, lambda / gamma, R}).value;
    EXPECT_NEAR(a, b, 1e-8);
  }
}

TEST(Penalty, Validation) {
  const auto s = two_point();
  EXPECT_THROW(restricted_fgan(kPX, kPG, FGenerator::builtin("tv"), 0, s), InputError);
  EXPECT_THROW(restricted_fgan(kPX, DiscreteDistribution{1.0}, FGenerator::builtin("tv"), 1, s), InputError);
  SolverConfig bad;
  bad.tol = 0;
  EXPECT_THROW(restricted_fgan(kPX, kPG, FGenerator::builtin("tv"), 1, s, bad), InputError);
}

TEST(FganDirect, Examples) {
  const auto s = two_point();
  const auto tv = FGenerator::builtin("tv");
  const auto d = fgan_direct(kPX, kPG, tv, 1.0, s);
  EXPECT_NEAR(d.value, 0.3, 1e-12);
  // h = (1,0) is feasible and attains the same value.
  const double alt = 1.0 * kPX[0] - tv.conjugate(1.0) * kPG[0] - tv.conjugate(0.0) * kPG[1];
  EXPECT_NEAR(alt, 0.3, 1e-15);
  const auto ind = fgan_direct(kPX, kPG, FGenerator::builtin("indicator"), 3.0, s);
  EXPECT_NEAR(ind.value, 0.3, 1e-12);
  EXPECT_NEAR(fgan_direct(kPX, kPX, tv, 1.0, s).value, 0, 1e-12);
  EXPECT_THROW(fgan_direct(kPX, kPG, FGenerator::builtin("kl"), 1.0, s), UnsupportedGeneratorError);
}

TEST(FganDirect, AgreesWithPenaltyForm) {
  Rng rng(91);
  for (const auto& name : {"tv", "indicator"}) {
    const auto f = FGenerator::builtin(name);
    for (int t = 0; t < 200; ++t) {
      const std::size_t n = 1 + rng.index(7);
      const auto s = t % 2 ? random_metric(n, rng) : random_euclidean(n, rng);
      const auto P = random_dist(n, rng), G = random_dist(n, rng);
      const double lambda = rng.uniform(0.05, 2);
      const auto d = fgan_direct(P, G, f, lambda, s);
      EXPECT_NEAR(d.value, restricted_fgan(P, G, f, lambda, s).value, 1e-6) << name;
      EXPECT_LE(d.h.lipschitz_modulus, 1 + 1e-9);
      // The reported h attains the value in the variational form.
      const auto g = f.scaled(lambda);
      double v = 0;
      for (std::size_t i = 0; i < n; ++i) v += P[i] * d.h.h[i] - G[i] * g.conjugate(d.h.h[i]);
      EXPECT_NEAR(v, d.value, 1e-9);
    }
  }
}

TEST(Wae, Examples) {
  const auto s = two_point();
  const auto tv = FGenerator::builtin("tv");
  const auto id = PushforwardMap::identity(2);
  EXPECT_NEAR(wae_objective(kPX, kPG, id, s, tv, 1.0).value, 0.3, 1e-9);
  Rng rng(93);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 1 + rng.index(5);
    const auto sp = random_metric(n, rng);
    const PushforwardMap G(rng.permutation(n), n);
    const auto PZ = random_dist(n, rng);
    const auto PX = pushforward(G, PZ);
    for (const auto& name : {"tv", "kl", "chi2"}) {
      const auto w = wae_objective(PX, PZ, G, sp, FGenerator::builtin(name), 1.0);
      EXPECT_NEAR(w.value, 0, 1e-9) << name;
      EXPECT_NEAR(fwae_objective(PX, PZ, G, sp, FGenerator::builtin(name), 1.0).value, 0, 1e-9) << name;
    }
    const auto other = random_dist(n, rng);
    const auto W = wasserstein_primal(other, PX, CostMatrix::from_space(sp)).value;
    const auto ind = FGenerator::builtin("indicator");
    EXPECT_NEAR(wae_objective(other, PZ, G, sp, ind, 1.0).value, W, 1e-12);
    EXPECT_NEAR(fwae_objective(other, PZ, G, sp, ind, 1.0).value, W, 1e-12);
  }
}

TEST(Wae, EncoderRowsAndConsistency) {
  Rng rng(95);
  for (int t = 0; t < 100; ++t) {
    const std::size_t nx = 1 + rng.index(5), nz = 1 + rng.index(5);
    const auto sp = random_euclidean(nx, rng);
    Vector px = random_weights(nx, rng);
    if (nx > 1) px[0] += px[nx - 1], px[nx - 1] = 0;
    const DiscreteDistribution PX(px);
    const auto PZ = random_dist(nz, rng);
    const auto G = random_map(nz, nx, rng);
    const auto f = FGenerator::builtin(t % 2 ? "chi2" : "tv");
    const double lambda = rng.uniform(0.1, 2);
    const auto w = wae_objective(PX, PZ, G, sp, f, lambda);
    for (std::size_t x = 0; x < nx; ++x) {
      EXPECT_NEAR(w.encoder.matrix.row(x).sum(), 1, 1e-9);
      EXPECT_GE(w.encoder.matrix.row(x).minCoeff(), 0);
    }
    if (nx > 1)
      for (std::size_t z = 0; z < nz; ++z) EXPECT_EQ(w.encoder.matrix(nx - 1, z), 1.0 / nz);
    // Recompute the value from the encoder.
    const Vector agg = w.encoder.aggregate(px);
    double rec = 0;
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t z = 0; z < nz; ++z) rec += px[x] * w.encoder.matrix(x, z) * sp.dist(x, G(z));
    EXPECT_NEAR(rec + f_divergence(agg, PZ.weights(), f.scaled(lambda)), w.value, 1e-9);
    EXPECT_NEAR(fwae_objective(PX, PZ, G, sp, f, lambda).value, w.value, 1e-6);
    EXPECT_LE(restricted_fgan(PX, pushforward(G, PZ), f, lambda, sp).value, w.value + 1e-6);
  }
}

TEST(Wae, MonotoneInLambda) {
  Rng rng(97);
  for (int t = 0; t < 20; ++t) {
    const auto sp = random_euclidean(4, rng);
    const auto PX = random_dist(4, rng), PZ = random_dist(3, rng);
    const auto G = random_map(3, 4, rng);
    double prev = -1;
    for (double lambda : {0.1, 0.3, 1.0, 3.0}) {
      const double v = wae_objective(PX, PZ, G, sp, FGenerator::builtin("kl"), lambda).value;
      EXPECT_GE(v, prev - 1e-9);
      prev = v;
    }
  }
}

TEST(Reconstruction, Bound) {
  Rng rng(99);
  const auto sp = random_euclidean(4, rng);
  const PushforwardMap G(rng.permutation(4), 4);
  const auto PX = random_dist(4, rng);
  Matrix inv = Matrix::Zero(4, 4);
  for (std::size_t z = 0; z < 4; ++z) inv(G(z), z) = 1;
  const auto exact = reconstruction_bound_check({inv}, G, PX, sp);
  EXPECT_EQ(exact.lhs, 0);
  EXPECT_EQ(exact.rhs, 0);
  EXPECT_TRUE(exact.holds);

  Matrix point = Matrix::Zero(4, 4);
  point.col(2).setOnes();
  const auto pm = reconstruction_bound_check({point}, G, PX, sp);
  double rhs = 0;
  for (std::size_t x = 0; x < 4; ++x) rhs += PX[x] * sp.dist(x, G(2));
  EXPECT_NEAR(pm.rhs, rhs, 1e-15);
  EXPECT_NEAR(pm.lhs, rhs, 1e-12);  // transport to a point mass is forced
  EXPECT_TRUE(pm.holds);

  for (int t = 0; t < 500; ++t) {
    const std::size_t nx = 1 + rng.index(5), nz = 1 + rng.index(5);
    const auto s = random_metric(nx, rng);
    Matrix E(nx, nz);
    for (std::size_t x = 0; x < nx; ++x) E.row(x) = random_weights(nz, rng).transpose();
    EXPECT_TRUE(reconstruction_bound_check({E}, random_map(nz, nx, rng), random_dist(nx, rng), s).holds);
  }
}

TEST(Thresholds, GammaStar) {
  const auto chi = FGenerator::builtin("chi2");
  EXPECT_NEAR(gamma_star({0.5, 0.5}, {0.25, 0.75}, chi), 4.0, 1e-15);
  EXPECT_NEAR(f_divergence(DD{0.5, 0.5}, DD{0.25, 0.75}, chi), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(gamma_star({0.3, 0.7}, {0.3, 0.7}, chi), 2.0, 1e-15);
  EXPECT_EQ(gamma_star({0.3, 0.7}, {0.3, 0.7}, FGenerator::builtin("kl")), kInf);
}

TEST(Thresholds, LambdaStar) {
  Rng rng(101);
  const auto tv = FGenerator::builtin("tv");
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 2 + rng.index(4);
    const auto est = lambda_star_estimate(random_dist(n, rng), tv, FiniteMetricSpace::discrete(n), 200, 50, t);
    EXPECT_NEAR(est.value, 0.5, 1e-9);
    EXPECT_FALSE(est.diverging);
  }
  EXPECT_EQ(lambda_star_estimate(kPG, FGenerator::builtin("indicator"), two_point(), 100, 10).value, 0);
  const double o = oracle::lambda_star_two_point(tv, 0.4, 1.0, 1e-4);
  EXPECT_NEAR(lambda_star_estimate(kPG, tv, two_point(), 100, 50).value, o, 1e-9);

  const auto chi = FGenerator::builtin("chi2");
  const auto est = lambda_star_estimate({0.5, 0.5}, chi, two_point(), 100, 50);
  EXPECT_TRUE(est.diverging);
  EXPECT_GE(est.value, oracle::lambda_star_two_point(chi, 0.5, 1.0, 1e-4));
}
