#include "dualgap/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualgap/errors.hpp"
#include "dualgap/network_simplex.hpp"

namespace dualgap {

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

std::vector<Eigen::Index> positive_indices(const Vector& w) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] > 0) idx.push_back(i);
  return idx;
}

void check_vector(const Vector& w, const char* what) {
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (!(w[i] >= 0) || !std::isfinite(w[i]))
      throw InputError(std::string(what) + " has negative or non-finite weights");
}

double log_sum_exp(const double* v, std::size_t n) {
  double m = -kInfD;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == -kInfD) return m;
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

DualResult dual_from_transshipment(NetworkSimplex& ns, const Vector& p, const Vector& q,
                                   const Matrix* dist) {
  if (ns.run() != NetworkSimplex::Status::Optimal)
    throw std::runtime_error("transshipment problem did not solve to optimality");
  const auto n = p.size();
  DualResult r;
  Vector h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = -ns.potential(i);
  h.array() -= h.minCoeff();
  r.value = h.dot(p - q);
  r.potentials.h = h;
  if (dist) r.potentials.lipschitz_modulus = lipschitz_modulus(h, *dist);
  r.pivots = ns.pivots();
  return r;
}

}  // namespace

double Coupling::marginal_error() const {
  double e = 0;
  if (matrix.size() == 0) return 0;
  e = std::max(e, (matrix.rowwise().sum() - row_marginal).cwiseAbs().maxCoeff());
  e = std::max(e, (matrix.colwise().sum().transpose() - col_marginal).cwiseAbs().maxCoeff());
  return e;
}

double lipschitz_modulus(const Vector& h, const Matrix& dist) {
  double m = 0;
  for (Eigen::Index i = 0; i < h.size(); ++i)
    for (Eigen::Index j = 0; j < h.size(); ++j)
      if (i != j) m = std::max(m, std::abs(h[i] - h[j]) / dist(i, j));
  return m;
}

TransportResult wasserstein_primal(const Vector& p, const Vector& q, const Matrix& cost) {
  if (cost.rows() != p.size() || cost.cols() != q.size())
    throw InputError("cost matrix shape does not match the marginals");
  check_vector(p, "row marginal");
  check_vector(q, "column marginal");
  if (!cost.allFinite()) throw InputError("cost matrix has non-finite entries");

  // Zero-mass points are dropped and reinserted afterwards.
  const auto rows = positive_indices(p), cols = positive_indices(q);
  const std::size_t nr = rows.size(), nc = cols.size();
  if (nr == 0 || nc == 0) throw InputError("marginal with zero total mass");
  NetworkSimplex ns(nr + nc);
  for (std::size_t i = 0; i < nr; ++i) ns.set_supply(i, p[rows[i]]);
  for (std::size_t j = 0; j < nc; ++j) ns.set_supply(nr + j, -q[cols[j]]);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) ns.add_arc(i, nr + j, cost(rows[i], cols[j]));
  if (ns.run() != NetworkSimplex::Status::Optimal)
    throw std::runtime_error("transport problem did not solve to optimality");

  TransportResult r;
  r.pivots = ns.pivots();
  r.coupling.row_marginal = p;
  r.coupling.col_marginal = q;
  r.coupling.matrix = Matrix::Zero(p.size(), q.size());
  std::size_t arc = 0;
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j, ++arc)
      r.coupling.matrix(rows[i], cols[j]) = std::max(0.0, ns.flow(arc));
  r.value = (r.coupling.matrix.array() * cost.array()).sum();

  Vector phi = Vector::Constant(p.size(), kInfD), psi = Vector::Constant(q.size(), kInfD);
  for (std::size_t i = 0; i < nr; ++i) phi[rows[i]] = -ns.potential(i);
  for (std::size_t j = 0; j < nc; ++j) psi[cols[j]] = ns.potential(nr + j);
  // c-transforms fill in dropped points and tighten the kept ones.
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (q[j] > 0) continue;
    double best = kInfD;
    for (auto i : rows) best = std::min(best, cost(i, j) - phi[i]);
    psi[j] = best;
  }
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0) continue;
    double best = kInfD;
    for (Eigen::Index j = 0; j < q.size(); ++j) best = std::min(best, cost(i, j) - psi[j]);
    phi[i] = best;
  }
  // Normalize the shared constant: min φ over the row support is 0.
  double shift = kInfD;
  for (auto i : rows) shift = std::min(shift, phi[i]);
  phi.array() -= shift;
  psi.array() += shift;
  r.potentials.phi = phi;
  r.potentials.psi = psi;
  return r;
}

TransportResult wasserstein_primal(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                                   const CostMatrix& cost) {
  return wasserstein_primal(P.weights(), Q.weights(), cost.values());
}

DualResult kantorovich_dual(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                            const FiniteMetricSpace& space) {
  const auto n = space.size();
  if (P.size() != n || Q.size() != n) throw InputError("distributions do not live on the space");
  NetworkSimplex ns(n);
  for (std::size_t i = 0; i < n; ++i) ns.set_supply(i, P[i] - Q[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) ns.add_arc(i, j, space.dist(i, j));
  return dual_from_transshipment(ns, P.weights(), Q.weights(), &space.dist());
}

DualResult kantorovich_dual(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                            const CostMatrix& cost) {
  if (!cost.metric_certified())
    throw ContractError("Lipschitz potentials require a metric-certified cost");
  return kantorovich_dual(P, Q, FiniteMetricSpace({}, cost.values()));
}

DualResult kantorovich_dual(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                            const GraphMetric& graph) {
  if (P.size() != graph.n || Q.size() != graph.n)
    throw InputError("distributions do not live on the graph");
  NetworkSimplex ns(graph.n);
  for (std::size_t i = 0; i < graph.n; ++i) ns.set_supply(i, P[i] - Q[i]);
  for (const auto& e : graph.edges) {
    ns.add_arc(e.u, e.v, e.w);
    ns.add_arc(e.v, e.u, e.w);
  }
  return dual_from_transshipment(ns, P.weights(), Q.weights(), nullptr);
}

SinkhornResult sinkhorn(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                        const CostMatrix& cost, double epsilon, const SinkhornConfig& cfg) {
  if (!(epsilon > 0)) throw InputError("sinkhorn requires epsilon > 0");
  if (cost.rows() != P.size() || cost.cols() != Q.size())
    throw InputError("cost matrix shape does not match the marginals");
  const auto rows = positive_indices(P.weights()), cols = positive_indices(Q.weights());
  const std::size_t nr = rows.size(), nc = cols.size();
  Matrix C(nr, nc);
  Vector p(nr), q(nc), logp(nr), logq(nc);
  for (std::size_t i = 0; i < nr; ++i) p[i] = P[rows[i]], logp[i] = std::log(p[i]);
  for (std::size_t j = 0; j < nc; ++j) q[j] = Q[cols[j]], logq[j] = std::log(q[j]);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) C(i, j) = cost(rows[i], cols[j]);

  Vector f = Vector::Zero(nr), g = Vector::Zero(nc);
  std::vector<double> buf(std::max(nr, nc));
  auto update_f = [&](double eps) {
    for (std::size_t i = 0; i < nr; ++i) {
      for (std::size_t j = 0; j < nc; ++j) buf[j] = logq[j] + (g[j] - C(i, j)) / eps;
      f[i] = -eps * log_sum_exp(buf.data(), nc);
    }
  };
  auto update_g = [&](double eps) {
    for (std::size_t j = 0; j < nc; ++j) {
      for (std::size_t i = 0; i < nr; ++i) buf[i] = logp[i] + (f[i] - C(i, j)) / eps;
      g[j] = -eps * log_sum_exp(buf.data(), nr);
    }
  };
  auto plan = [&](double eps) {
    Matrix pi(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j)
        pi(i, j) = std::exp(logp[i] + logq[j] + (f[i] + g[j] - C(i, j)) / eps);
    return pi;
  };
  // Columns are exact after update_g, so the row error is the whole story.
  auto row_error = [&](double eps) { return (plan(eps).rowwise().sum() - p).cwiseAbs().sum(); };

  // Anneal ε from the cost spread down to the target; each stage warm-starts
  // the next. Only the last stage has to meet cfg.tol.
  const double spread = C.size() ? C.maxCoeff() - C.minCoeff() : 0.0;
  std::vector<double> stages;
  for (double e = spread; e > epsilon; e /= 4) stages.push_back(e);
  stages.push_back(epsilon);

  SinkhornResult r;
  double err = kInfD;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const double eps = stages[s];
    const double stage_tol = s + 1 == stages.size() ? cfg.tol : std::max(cfg.tol, 1e-6);
    err = kInfD;
    while (r.iters < cfg.max_iters) {
      update_f(eps);
      update_g(eps);
      ++r.iters;
      if (r.iters % 10 == 0 || s + 1 == stages.size()) {
        err = row_error(eps);
        if (err <= stage_tol) break;
      }
    }
    if (err > stage_tol) throw ConvergenceError("sinkhorn did not converge", err);
  }
  r.marginal_error = err;

  // Round onto the transport polytope: scale down rows, then columns, then
  // add the rank-one correction for the remaining deficit.
  Matrix pi = plan(epsilon);
  const Vector rs = pi.rowwise().sum();
  for (std::size_t i = 0; i < nr; ++i) pi.row(i) *= std::min(1.0, p[i] / rs[i]);
  const Vector cs = pi.colwise().sum().transpose();
  for (std::size_t j = 0; j < nc; ++j) pi.col(j) *= std::min(1.0, q[j] / cs[j]);
  const Vector er = (p - pi.rowwise().sum()).cwiseMax(0.0);
  const Vector ec = (q - pi.colwise().sum().transpose()).cwiseMax(0.0);
  if (er.sum() > 0) pi += er * ec.transpose() / er.sum();

  double value = 0;
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) {
      const double v = pi(i, j);
      value += v * C(i, j);
      if (v > 0) value += epsilon * v * (std::log(v) - logp[i] - logq[j]);
    }
  r.value = value;
  r.coupling.row_marginal = P.weights();
  r.coupling.col_marginal = Q.weights();
  r.coupling.matrix = Matrix::Zero(P.size(), Q.size());
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) r.coupling.matrix(rows[i], cols[j]) = pi(i, j);
  return r;
}

double ipm(const DiscreteDistribution& P, const DiscreteDistribution& Q, const std::string& family,
           const FiniteMetricSpace& space) {
  if (P.size() != Q.size()) throw InputError("ipm: universes differ");
  if (family == "bounded1") return (P.weights() - Q.weights()).cwiseAbs().sum();
  if (family == "lipschitz") return kantorovich_dual(P, Q, space).value;
  throw InputError("unknown function family: " + family);
}

double ipm(const DiscreteDistribution& P, const DiscreteDistribution& Q,
           const std::vector<Vector>& family) {
  if (family.empty()) throw InputError("function family must be nonempty");
  double best = -kInfD;
  for (const auto& f : family) {
    if (f.size() != static_cast<Eigen::Index>(P.size()) || P.size() != Q.size())
      throw InputError("ipm: universes differ");
    best = std::max(best, f.dot(P.weights() - Q.weights()));
  }
  return best;
}

}  // namespace dualgap
