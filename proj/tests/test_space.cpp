#include <gtest/gtest.h>

#include "dualgap/errors.hpp"
#include "dualgap/space.hpp"
#include "helpers.hpp"

using namespace dualgap;
using namespace testing_helpers;

TEST(Metric, RejectsBrokenAxioms) {
  Matrix d(3, 3);
  d << 0, 1, 5, 1, 0, 1, 5, 1, 0;
  EXPECT_THROW(validate_metric(d), InputError);  // triangle
  Matrix asym(2, 2);
  asym << 0, 1, 2, 0;
  EXPECT_THROW(validate_metric(asym), InputError);
  Matrix diag(2, 2);
  diag << 1, 1, 1, 0;
  EXPECT_THROW(validate_metric(diag), InputError);
  Matrix zero(2, 2);
  zero << 0, 0, 0, 0;
  EXPECT_THROW(validate_metric(zero), InputError);
  EXPECT_THROW(FiniteMetricSpace({"a"}, Matrix::Zero(2, 2)), InputError);
}

TEST(Metric, ClosureProducesMetric) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) EXPECT_NO_THROW(random_metric(8, rng));
}

TEST(Metric, DiscreteAndScaled) {
  const auto s = FiniteMetricSpace::discrete(3);
  EXPECT_EQ(s.dist(0, 0), 0);
  EXPECT_EQ(s.dist(0, 2), 1);
  EXPECT_EQ(s.scaled(2.5).dist(1, 2), 2.5);
  EXPECT_EQ(s.labels()[2], "2");
}

TEST(Distribution, Validation) {
  EXPECT_THROW(DiscreteDistribution({0.5, 0.6}), InputError);
  EXPECT_THROW(DiscreteDistribution({-0.1, 1.1}), InputError);
  EXPECT_NO_THROW(DiscreteDistribution({0.25, 0.75}));
  const auto n = DiscreteDistribution::normalized(Vector::Constant(4, 3.0));
  EXPECT_DOUBLE_EQ(n[2], 0.25);
  EXPECT_EQ(DiscreteDistribution({0.0, 1.0, 0.0}).support(), std::vector<std::size_t>{1});
}

TEST(Pushforward, Examples) {
  const DiscreteDistribution P{0.2, 0.3, 0.5};
  EXPECT_EQ(pushforward(PushforwardMap::identity(3), P).weights(), P.weights());
  const auto swapped = pushforward(PushforwardMap({1, 0}, 2), DiscreteDistribution{0.2, 0.8});
  EXPECT_EQ(swapped[0], 0.8);
  EXPECT_EQ(swapped[1], 0.2);
  const PushforwardMap G({0, 0, 1}, 2);
  EXPECT_FALSE(G.invertible());
  const auto agg = pushforward(G, P);
  EXPECT_DOUBLE_EQ(agg[0], 0.5);
  EXPECT_DOUBLE_EQ(agg[1], 0.5);
  EXPECT_THROW(PushforwardMap({0, 3}, 2), InputError);
  EXPECT_THROW(pushforward(G, DiscreteDistribution{0.5, 0.5}), InputError);
}

TEST(Pushforward, MassAndAssociativity) {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t a = 1 + rng.index(6), b = 1 + rng.index(6), c = 1 + rng.index(6);
    std::vector<std::size_t> m1(a), m2(b);
    for (auto& v : m1) v = rng.index(b);
    for (auto& v : m2) v = rng.index(c);
    const PushforwardMap G1(m1, b), G2(m2, c);
    const auto P = random_dist(a, rng);
    const auto two = pushforward(G2, pushforward(G1, P));
    const auto once = pushforward(G2.after(G1), P);
    EXPECT_NEAR(two.weights().sum(), 1.0, 1e-12);
    EXPECT_LE((two.weights() - once.weights()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Diameter, Examples) {
  Matrix d(3, 3);
  d << 0, 1, 2, 1, 0, 1.5, 2, 1.5, 0;
  const FiniteMetricSpace s({}, d);
  EXPECT_EQ(diameter(s, {1}), 0);
  EXPECT_EQ(diameter(s, {0, 1, 2}), 2);
  EXPECT_EQ(diameter(two_point(3), {0, 1}), 3);
  EXPECT_THROW(diameter(s, {}), InputError);
}

TEST(PartialPushforward, Examples) {
  const auto id = PushforwardMap::identity(2);
  const DiscreteDistribution P{0.5, 0.5}, Q{0.6, 0.4};
  Vector e1(2);
  e1 << 0, 1;
  EXPECT_FALSE(check_partial_pushforward(id, P, Q, {e1}, 1e-12));
  EXPECT_TRUE(check_partial_pushforward(id, P, Q, {Vector::Ones(2)}, 1e-12));
  EXPECT_TRUE(check_partial_pushforward(id, P, P, {e1, Vector::Ones(2)}, 1e-12));
  EXPECT_THROW(check_partial_pushforward(id, P, Q, {}, 1e-12), InputError);
  EXPECT_THROW(check_partial_pushforward(id, P, Q, {Vector::Ones(3)}, 1e-12), InputError);
}

TEST(PartialPushforward, SubsetConvexHullAndInverse) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.index(4);
    const auto perm = rng.permutation(n);
    const PushforwardMap T(perm, n);
    const auto P = random_dist(n, rng);
    std::vector<Vector> family;
    for (int k = 0; k < 3; ++k) family.push_back(Vector::NullaryExpr(n, [&] { return rng.uniform(-1, 1); }));
    const auto Q = pushforward(T, P);
    ASSERT_TRUE(check_partial_pushforward(T, P, Q, family, 1e-12));
    for (std::size_t k = 0; k < family.size(); ++k)
      EXPECT_TRUE(check_partial_pushforward(T, P, Q, {family[k]}, 1e-12));
    const auto w = rng.simplex(3);
    const Vector mix = w[0] * family[0] + w[1] * family[1] + w[2] * family[2];
    EXPECT_TRUE(check_partial_pushforward(T, P, Q, {mix}, 1e-12));
    // H = T⁻¹ pushes Q back to P on the family composed with T.
    std::vector<std::size_t> inv(n);
    for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = i;
    const PushforwardMap H(inv, n);
    std::vector<Vector> pulled;
    for (const auto& f : family) {
      Vector g(n);
      for (std::size_t i = 0; i < n; ++i) g[i] = f[perm[i]];
      pulled.push_back(g);
    }
    EXPECT_TRUE(check_partial_pushforward(H, Q, P, pulled, 1e-12));
  }
}

TEST(PartialPushforward, SubsetOfPassingFamilyOnInexactMatch) {
  // Q differs from T#P but agrees on f = (1,1,0) and the constant.
  const auto id = PushforwardMap::identity(3);
  const DiscreteDistribution P{0.2, 0.3, 0.5}, Q{0.4, 0.1, 0.5};
  Vector f(3), g(3);
  f << 1, 1, 0;
  g << 0, 1, 0;
  EXPECT_TRUE(check_partial_pushforward(id, P, Q, {f, Vector::Ones(3)}, 1e-12));
  EXPECT_TRUE(check_partial_pushforward(id, P, Q, {f}, 1e-12));
  EXPECT_FALSE(check_partial_pushforward(id, P, Q, {f, g}, 1e-12));
}

TEST(GraphMetric, GridIsManhattan) {
  const auto g = GraphMetric::grid(4, 0.5);
  const Matrix d = g.distances();
  EXPECT_DOUBLE_EQ(d(0, 15), 3.0);
  EXPECT_DOUBLE_EQ(d(1, 4), 1.0);
  EXPECT_NO_THROW(validate_metric(d));
}
