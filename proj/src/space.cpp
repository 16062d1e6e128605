#include "dualgap/space.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dualgap/errors.hpp"

namespace dualgap {

namespace {

std::vector<std::string> default_labels(std::size_t n,
                                        std::vector<std::string> labels) {
  if (labels.empty()) {
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != n) throw InputError("label count does not match point count");
  return labels;
}

}  // namespace

void validate_metric(const Matrix& d) {
  const auto n = d.rows();
  if (d.cols() != n) throw InputError("distance matrix is not square");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) throw InputError("distance matrix has nonzero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(d(i, j))) throw InputError("distance matrix has non-finite entry");
      if (d(i, j) != d(j, i)) throw InputError("distance matrix is not symmetric");
      if (i != j && !(d(i, j) > 0.0))
        throw InputError("distinct points must have positive distance");
    }
  }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (d(i, j) > d(i, k) + d(k, j) + kTriangleSlack)
          throw InputError("triangle inequality violated at (" + std::to_string(i) +
                           "," + std::to_string(j) + "," + std::to_string(k) + ")");
}

Matrix shortest_path_closure(const Matrix& m) {
  Matrix d = m;
  const auto n = d.rows();
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  // Symmetrize exactly; the closure can differ in the last ulp.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) d(i, j) = d(j, i) = std::min(d(i, j), d(j, i));
  return d;
}

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels, Matrix dist,
                                     std::optional<Matrix> coords)
    : labels_(default_labels(dist.rows(), std::move(labels))),
      dist_(std::move(dist)),
      coords_(std::move(coords)) {
  if (dist_.rows() == 0) throw InputError("metric space must have at least one point");
  validate_metric(dist_);
  if (coords_ && coords_->rows() != dist_.rows())
    throw InputError("coordinate count does not match point count");
}

FiniteMetricSpace FiniteMetricSpace::euclidean(const Matrix& coords,
                                               std::vector<std::string> labels) {
  const auto n = coords.rows();
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (coords.row(i) - coords.row(j)).norm();
  return FiniteMetricSpace(std::move(labels), std::move(d), coords);
}

FiniteMetricSpace FiniteMetricSpace::manhattan(const Matrix& coords,
                                               std::vector<std::string> labels) {
  const auto n = coords.rows();
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      d(i, j) = (coords.row(i) - coords.row(j)).cwiseAbs().sum();
  return FiniteMetricSpace(std::move(labels), std::move(d), coords);
}

FiniteMetricSpace FiniteMetricSpace::discrete(std::size_t n,
                                              std::vector<std::string> labels) {
  Matrix d = Matrix::Ones(n, n) - Matrix::Identity(n, n);
  return FiniteMetricSpace(std::move(labels), std::move(d));
}

FiniteMetricSpace FiniteMetricSpace::scaled(double gamma) const {
  if (!(gamma > 0)) throw InputError("metric scale must be positive");
  return FiniteMetricSpace(labels_, dist_ * gamma, coords_);
}

CostMatrix::CostMatrix(Matrix values) : CostMatrix(std::move(values), false) {}

CostMatrix::CostMatrix(Matrix values, bool certified)
    : values_(std::move(values)), certified_(certified) {
  if (!values_.allFinite()) throw InputError("cost matrix has non-finite entries");
}

CostMatrix CostMatrix::from_space(const FiniteMetricSpace& space) {
  return CostMatrix(space.dist(), true);
}

DiscreteDistribution::DiscreteDistribution(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw InputError("distribution must have at least one point");
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i]))
      throw InputError("distribution weights must be finite and nonnegative");
  if (std::abs(weights_.sum() - 1.0) > kMassTolerance)
    throw InputError("distribution weights must sum to 1");
}

DiscreteDistribution::DiscreteDistribution(std::initializer_list<double> weights)
    : DiscreteDistribution(Vector(Eigen::Map<const Vector>(weights.begin(), weights.size()))) {}

DiscreteDistribution DiscreteDistribution::normalized(Vector weights) {
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (weights[i] < 0) {
      if (weights[i] > -1e-14) weights[i] = 0;
      else throw InputError("cannot normalize negative weights");
    }
  const double s = weights.sum();
  if (!(s > 0)) throw InputError("cannot normalize zero total mass");
  return DiscreteDistribution(weights / s);
}

DiscreteDistribution DiscreteDistribution::uniform(std::size_t n) {
  return DiscreteDistribution(Vector::Constant(n, 1.0 / n));
}

DiscreteDistribution DiscreteDistribution::point_mass(std::size_t n, std::size_t at) {
  Vector w = Vector::Zero(n);
  w[at] = 1.0;
  return DiscreteDistribution(w);
}

std::vector<std::size_t> DiscreteDistribution::support() const {
  std::vector<std::size_t> s;
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    if (weights_[i] > 0) s.push_back(i);
  return s;
}

PushforwardMap::PushforwardMap(std::vector<std::size_t> mapping, std::size_t target_size)
    : mapping_(std::move(mapping)), target_size_(target_size), invertible_(true) {
  std::vector<bool> hit(target_size, false);
  for (auto t : mapping_) {
    if (t >= target_size) throw InputError("map sends a point outside the target universe");
    if (hit[t]) invertible_ = false;
    hit[t] = true;
  }
}

PushforwardMap PushforwardMap::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = i;
  return PushforwardMap(std::move(m), n);
}

bool PushforwardMap::surjective() const {
  std::vector<bool> hit(target_size_, false);
  for (auto t : mapping_) hit[t] = true;
  for (bool h : hit)
    if (!h) return false;
  return true;
}

PushforwardMap PushforwardMap::after(const PushforwardMap& inner) const {
  if (inner.target_size() != source_size())
    throw InputError("composed maps have mismatched universes");
  std::vector<std::size_t> m(inner.source_size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = mapping_[inner(i)];
  return PushforwardMap(std::move(m), target_size_);
}

DiscreteDistribution pushforward(const PushforwardMap& map, const DiscreteDistribution& dist) {
  if (dist.size() != map.source_size())
    throw InputError("distribution is not over the map's source universe");
  Vector out = Vector::Zero(map.target_size());
  for (std::size_t i = 0; i < dist.size(); ++i) out[map(i)] += dist[i];
  return DiscreteDistribution(std::move(out));
}

double diameter(const FiniteMetricSpace& space, const std::vector<std::size_t>& support) {
  if (support.empty()) throw InputError("diameter of an empty support");
  double d = 0;
  for (auto i : support) {
    if (i >= space.size()) throw InputError("support index out of range");
    for (auto j : support) d = std::max(d, space.dist(i, j));
  }
  return d;
}

bool check_partial_pushforward(const PushforwardMap& T, const DiscreteDistribution& P,
                               const DiscreteDistribution& Q,
                               const std::vector<Vector>& family, double tol) {
  if (family.empty()) throw InputError("function family must be nonempty");
  if (P.size() != T.source_size() || Q.size() != T.target_size())
    throw InputError("distribution sizes do not match the map");
  for (const auto& f : family) {
    if (static_cast<std::size_t>(f.size()) != T.target_size())
      throw InputError("family member has wrong length");
    double ep = 0;
    for (std::size_t i = 0; i < P.size(); ++i) ep += P[i] * f[T(i)];
    const double eq = Q.weights().dot(f);
    if (std::abs(ep - eq) > tol) return false;
  }
  return true;
}

GraphMetric GraphMetric::grid(std::size_t K, double h) {
  GraphMetric g;
  g.n = K * K;
  for (std::size_t r = 0; r < K; ++r)
    for (std::size_t c = 0; c < K; ++c) {
      const std::size_t u = r * K + c;
      if (c + 1 < K) g.edges.push_back({u, u + 1, h});
      if (r + 1 < K) g.edges.push_back({u, u + K, h});
    }
  return g;
}

Matrix GraphMetric::distances() const {
  const double inf = std::numeric_limits<double>::infinity();
  Matrix d = Matrix::Constant(n, n, inf);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = 0;
  for (const auto& e : edges) {
    d(e.u, e.v) = std::min(d(e.u, e.v), e.w);
    d(e.v, e.u) = std::min(d(e.v, e.u), e.w);
  }
  return shortest_path_closure(d);
}

}  // namespace dualgap
