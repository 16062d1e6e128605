#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dualgap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr double kTriangleSlack = 1e-12;
constexpr double kMassTolerance = 1e-12;

// Throws InputError naming the first violated metric axiom.
void validate_metric(const Matrix& dist);

// Replaces every entry by the shortest-path distance through the matrix,
// which turns any symmetric nonnegative matrix into a pseudometric.
Matrix shortest_path_closure(const Matrix& m);

class FiniteMetricSpace {
 public:
  // Validates the metric axioms; coords rows are points when present.
  FiniteMetricSpace(std::vector<std::string> labels, Matrix dist,
                    std::optional<Matrix> coords = std::nullopt);

  static FiniteMetricSpace euclidean(const Matrix& coords,
                                     std::vector<std::string> labels = {});
  // Manhattan distance between coordinate rows.
  static FiniteMetricSpace manhattan(const Matrix& coords,
                                     std::vector<std::string> labels = {});
  // c(x,y) = 1 iff x != y.
  static FiniteMetricSpace discrete(std::size_t n,
                                    std::vector<std::string> labels = {});

  std::size_t size() const { return labels_.size(); }
  const Matrix& dist() const { return dist_; }
  double dist(std::size_t i, std::size_t j) const { return dist_(i, j); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::optional<Matrix>& coords() const { return coords_; }

  // Same points, distances multiplied by gamma > 0.
  FiniteMetricSpace scaled(double gamma) const;

 private:
  std::vector<std::string> labels_;
  Matrix dist_;
  std::optional<Matrix> coords_;
};

class CostMatrix {
 public:
  // Arbitrary finite costs; not usable where Lipschitz potentials are needed.
  explicit CostMatrix(Matrix values);
  static CostMatrix from_space(const FiniteMetricSpace& space);

  const Matrix& values() const { return values_; }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  std::size_t rows() const { return values_.rows(); }
  std::size_t cols() const { return values_.cols(); }
  bool metric_certified() const { return certified_; }

 private:
  CostMatrix(Matrix values, bool certified);
  Matrix values_;
  bool certified_;
};

class DiscreteDistribution {
 public:
  // Weights must be nonnegative and sum to 1 within kMassTolerance.
  explicit DiscreteDistribution(Vector weights);
  DiscreteDistribution(std::initializer_list<double> weights);
  // Rescales nonnegative weights with positive total.
  static DiscreteDistribution normalized(Vector weights);
  static DiscreteDistribution uniform(std::size_t n);
  static DiscreteDistribution point_mass(std::size_t n, std::size_t at);

  std::size_t size() const { return weights_.size(); }
  const Vector& weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::vector<std::size_t> support() const;

 private:
  Vector weights_;
};

class PushforwardMap {
 public:
  PushforwardMap(std::vector<std::size_t> mapping, std::size_t target_size);
  static PushforwardMap identity(std::size_t n);

  std::size_t source_size() const { return mapping_.size(); }
  std::size_t target_size() const { return target_size_; }
  std::size_t operator()(std::size_t i) const { return mapping_[i]; }
  const std::vector<std::size_t>& mapping() const { return mapping_; }
  bool invertible() const { return invertible_; }
  bool surjective() const;
  bool is_permutation() const {
    return invertible_ && source_size() == target_size_;
  }

  // (this ∘ inner)(z) = this(inner(z)).
  PushforwardMap after(const PushforwardMap& inner) const;

 private:
  std::vector<std::size_t> mapping_;
  std::size_t target_size_;
  bool invertible_;
};

DiscreteDistribution pushforward(const PushforwardMap& map,
                                 const DiscreteDistribution& dist);

double diameter(const FiniteMetricSpace& space,
                const std::vector<std::size_t>& support);

bool check_partial_pushforward(const PushforwardMap& T,
                               const DiscreteDistribution& P,
                               const DiscreteDistribution& Q,
                               const std::vector<Vector>& family, double tol);

// Undirected weighted graph whose shortest-path distance is the metric.
// Lets transport on large grids run on sparse arcs instead of n² pairs.
struct GraphMetric {
  struct Edge {
    std::size_t u, v;
    double w;
  };
  std::size_t n = 0;
  std::vector<Edge> edges;

  // K×K lattice with spacing h and 4-neighbour edges: Manhattan distance.
  static GraphMetric grid(std::size_t K, double h);
  Matrix distances() const;
};

}  // namespace dualgap
