#pragma once

#include "dualgap/random.hpp"
#include "dualgap/space.hpp"

namespace testing_helpers {

using namespace dualgap;

inline Vector random_weights(std::size_t n, Rng& rng) {
  const auto w = rng.simplex(n);
  return Eigen::Map<const Vector>(w.data(), n);
}

inline DiscreteDistribution random_dist(std::size_t n, Rng& rng) {
  return DiscreteDistribution::normalized(random_weights(n, rng));
}

// Shortest-path closure of a random symmetric matrix with entries in [0.1, 1].
inline FiniteMetricSpace random_metric(std::size_t n, Rng& rng) {
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(0.1, 1.0);
  return FiniteMetricSpace({}, shortest_path_closure(m));
}

inline FiniteMetricSpace random_euclidean(std::size_t n, Rng& rng) {
  Matrix c(n, 2);
  for (std::size_t i = 0; i < n; ++i) c(i, 0) = rng.uniform(), c(i, 1) = rng.uniform();
  return FiniteMetricSpace::euclidean(c);
}

inline FiniteMetricSpace two_point(double d = 1.0) {
  Matrix m(2, 2);
  m << 0, d, d, 0;
  return FiniteMetricSpace({"a", "b"}, m);
}

}  // namespace testing_helpers
