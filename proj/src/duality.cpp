#include "dualgap/duality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dualgap/errors.hpp"
#include "dualgap/network_simplex.hpp"
#include "dualgap/random.hpp"

namespace dualgap {

namespace {

// The marginal-penalty problem in a slightly more general form: free point z
// is priced at column sigma[z] of C, so that
//   J(q) = W_C(p, σ#q) + Σ_z G_z(q_z),  G_z(t) = r_z·g(t/r_z).
// σ = identity gives the problem as stated; σ = G with C over X×X gives the
// f-WAE objective.
struct Model {
  Vector p;
  Matrix C;
  std::vector<std::size_t> sigma;
  Vector r;
  FGenerator g;  // already multiplied by λ

  std::size_t m() const { return sigma.size(); }
  std::size_t K() const { return C.cols(); }
  bool active(std::size_t z) const { return r[z] > 0 || std::isfinite(g.recession()); }

  Vector push(const Vector& q) const {
    Vector out = Vector::Zero(K());
    for (std::size_t z = 0; z < m(); ++z) out[sigma[z]] += q[z];
    return out;
  }

  double G(std::size_t z, double t) const {
    if (r[z] > 0) return r[z] * g.eval(t / r[z]);
    return t > 0 ? t * g.recession() : 0;
  }
  double dG(std::size_t z, double t) const {
    return r[z] > 0 ? g.deriv(t / r[z]) : g.recession();
  }
  double Gstar(std::size_t z, double u) const {
    if (r[z] > 0) return r[z] * g.conjugate(u);
    return u <= g.recession() ? 0 : kInf;
  }
  double dGstar(std::size_t z, double u) const {
    return r[z] > 0 ? r[z] * g.conjugate_deriv(u) : 0;
  }
  double wall(std::size_t z) const { return r[z] > 0 ? g.conjugate_upper() : g.recession(); }
  bool wall_closed(std::size_t z) const { return r[z] > 0 ? g.conjugate_upper_closed() : true; }

  double primal(const Vector& q, TransportResult* out = nullptr) const {
    TransportResult tr = wasserstein_primal(p, push(q), C);
    const double value = tr.value + f_divergence(q, r, g);
    if (out) *out = std::move(tr);
    return value;
  }

  // Σ_x p_x min_k (C_xk + v_k) − Σ_z G*_z(v_σ(z)); a lower bound on J for
  // every v. Price nodes that no active point uses are left out of the min.
  double dual(const Vector& v) const {
    std::vector<char> used(K(), 0);
    for (std::size_t z = 0; z < m(); ++z)
      if (active(z)) used[sigma[z]] = 1;
    double s = 0;
    for (Eigen::Index x = 0; x < p.size(); ++x) {
      if (!(p[x] > 0)) continue;
      double best = kInf;
      for (std::size_t k = 0; k < K(); ++k)
        if (used[k]) best = std::min(best, C(x, k) + v[k]);
      s += p[x] * best;
    }
    for (std::size_t z = 0; z < m(); ++z)
      if (active(z)) s -= Gstar(z, v[sigma[z]]);
    return std::isnan(s) ? -kInf : s;
  }

  // The dual is concave in a common shift v + a; its derivative is
  // Σp − Σ_z (G*_z)'(v + a). Returns the best shifted dual value and the
  // primal point the conjugate gradients suggest there.
  double shifted_dual(const Vector& v, Vector* q_out) const {
    const double psum = p.sum();
    double a_hi = kInf;
    bool hi_closed = true;
    for (std::size_t z = 0; z < m(); ++z) {
      if (!active(z)) continue;
      const double w = wall(z) - v[sigma[z]];
      if (w < a_hi || (w == a_hi && !wall_closed(z))) a_hi = w, hi_closed = wall_closed(z);
    }
    auto deriv = [&](double a) {
      double s = psum;
      for (std::size_t z = 0; z < m(); ++z)
        if (active(z) && r[z] > 0) s -= dGstar(z, v[sigma[z]] + a);
      return std::isnan(s) ? -kInf : s;
    };
    double a_star;
    if (std::isfinite(a_hi) && hi_closed && deriv(a_hi) >= 0) {
      a_star = a_hi;
    } else {
      double lo = std::isfinite(a_hi) ? std::min(0.0, a_hi - 1) : 0.0, step = 1;
      for (int it = 0; it < 200 && deriv(lo) <= 0; ++it) lo -= step, step *= 2;
      double hi;
      if (std::isfinite(a_hi)) {
        hi = a_hi;
      } else {
        hi = lo + 1, step = 1;
        for (int it = 0; it < 200 && deriv(hi) > 0; ++it) hi += step, step *= 2;
      }
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (1 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (deriv(mid) > 0 ? lo : hi) = mid;
      }
      a_star = lo;
    }
    Vector vs = v.array() + a_star;
    const double best = std::max(dual(v), dual(vs));
    if (q_out) {
      Vector q = Vector::Zero(m());
      double mass = 0;
      for (std::size_t z = 0; z < m(); ++z)
        if (active(z) && r[z] > 0) mass += (q[z] = std::max(0.0, dGstar(z, vs[sigma[z]])));
      // Leftover mass goes to zero-reference points sitting at their wall.
      if (mass < psum) {
        for (std::size_t z = 0; z < m(); ++z)
          if (active(z) && !(r[z] > 0) && vs[sigma[z]] >= wall(z) - 1e-12) {
            q[z] += psum - mass;
            mass = psum;
            break;
          }
      }
      if (mass > 0 && std::isfinite(mass)) q *= psum / mass;
      *q_out = q;
    }
    return best;
  }
};

struct Candidate {
  double value = kInf;
  Vector q;
};

void offer(const Model& M, const Vector& q, Candidate& best) {
  // Dual-suggested points can lose all mass on kinked generators.
  if (q.size() == 0 || !q.allFinite() || !(q.sum() > 0.5 * M.p.sum())) return;
  const double v = M.primal(q);
  if (v < best.value) best.value = v, best.q = q;
}

// Piecewise-linear interpolation of each G_z between breakpoints gives an
// upper model of J that is a min-cost flow problem:
//   x → price node k (cost C_xk) → free point z (cost 0) → sink (segments).
// The interpolation is exact for piecewise-linear generators whose kinks are
// breakpoints, so TV solves in one round. Smooth generators are refined
// around the current solution until the dual certificate closes the gap.
PenaltySolution solve_refinement(const Model& M, const SolverConfig& cfg) {
  const std::size_t n = M.p.size(), K = M.K(), m = M.m();
  const double psum = M.p.sum();

  std::vector<std::size_t> rows;
  for (std::size_t x = 0; x < n; ++x)
    if (M.p[x] > 0) rows.push_back(x);
  std::vector<char> k_used(K, 0);
  for (std::size_t z = 0; z < m; ++z)
    if (M.active(z)) k_used[M.sigma[z]] = 1;

  std::vector<std::vector<double>> bps(m);
  std::vector<double> kinks;
  if (M.g.shape() == GeneratorShape::PiecewiseLinear) kinks.push_back(1.0);
  auto add_point = [&](std::size_t z, double t) {
    if (!(t >= bps[z].front()) || t > psum || !std::isfinite(t)) return;
    bps[z].push_back(t);
  };
  auto tidy = [&](std::size_t z) {
    auto& b = bps[z];
    std::sort(b.begin(), b.end());
    std::vector<double> out;
    for (double t : b)
      if (out.empty() || t - out.back() > 1e-13) out.push_back(t);
    b = std::move(out);
  };
  for (std::size_t z = 0; z < m; ++z) {
    if (!M.active(z) || !(M.r[z] > 0)) continue;
    const double rz = M.r[z];
    const double lo = std::isfinite(M.G(z, 0)) ? 0.0 : std::min(rz, psum) * 1e-3;
    bps[z] = {lo};
    for (double t : {0.5 * rz, rz, 2 * rz, 0.25 * psum, 0.5 * psum, 0.75 * psum, psum})
      add_point(z, t);
    for (double k : kinks) add_point(z, k * rz);
    tidy(z);
  }

  Candidate best;
  double best_lower = -kInf;
  PenaltySolution sol;
  sol.method = "refinement";
  double h = 0.25 * psum;
  for (std::size_t round = 0; round < cfg.max_rounds; ++round) {
    const std::size_t nr = rows.size();
    // Node layout: rows, price nodes, free points, sink.
    const std::size_t k0 = nr, z0 = nr + K, sink = nr + K + m;
    NetworkSimplex ns(sink + 1);
    double constant = 0, lower_total = 0;
    for (std::size_t i = 0; i < nr; ++i) {
      ns.set_supply(i, M.p[rows[i]]);
      for (std::size_t k = 0; k < K; ++k)
        if (k_used[k]) ns.add_arc(i, k0 + k, M.C(rows[i], k));
    }
    for (std::size_t z = 0; z < m; ++z)
      if (M.active(z)) ns.add_arc(k0 + M.sigma[z], z0 + z, 0.0);
    std::vector<std::vector<std::size_t>> seg_arcs(m);
    std::vector<std::size_t> lin_arc(m, 0);
    for (std::size_t z = 0; z < m; ++z) {
      if (!M.active(z)) continue;
      if (!(M.r[z] > 0)) {
        lin_arc[z] = ns.add_arc(z0 + z, sink, M.g.recession());
        continue;
      }
      const auto& b = bps[z];
      // The first breakpoint is a lower bound on q_z, paid up front.
      ns.set_supply(z0 + z, -b[0]);
      lower_total += b[0];
      constant += M.G(z, b[0]);
      for (std::size_t j = 0; j + 1 < b.size(); ++j) {
        const double w = b[j + 1] - b[j];
        const double slope = (M.G(z, b[j + 1]) - M.G(z, b[j])) / w;
        seg_arcs[z].push_back(ns.add_arc(z0 + z, sink, slope, w));
      }
    }
    ns.set_supply(sink, -(psum - lower_total));
    const auto status = ns.run();
    if (status != NetworkSimplex::Status::Optimal) {
      // Lower bounds above the reachable mass; shrink them and retry.
      for (std::size_t z = 0; z < m; ++z)
        if (!bps[z].empty() && bps[z][0] > 0) bps[z][0] *= 0.5;
      continue;
    }
    sol.iters = round + 1;

    Vector q = Vector::Zero(m);
    for (std::size_t z = 0; z < m; ++z) {
      if (!M.active(z)) continue;
      if (!(M.r[z] > 0)) {
        q[z] = ns.flow(lin_arc[z]);
        continue;
      }
      q[z] = bps[z][0];
      for (auto a : seg_arcs[z]) q[z] += ns.flow(a);
    }
    offer(M, q, best);

    // Prices: the cost of routing one more unit from price node k to the sink.
    Vector v_lp = Vector::Zero(K);
    for (std::size_t k = 0; k < K; ++k) v_lp[k] = ns.potential(sink) - ns.potential(k0 + k);
    for (std::size_t z = 0; z < m; ++z)
      if (M.active(z) && M.wall_closed(z)) v_lp[M.sigma[z]] = std::min(v_lp[M.sigma[z]], M.wall(z));
    Vector q_dual;
    best_lower = std::max(best_lower, M.shifted_dual(v_lp, &q_dual));
    offer(M, q_dual, best);

    // Derivative prices at the flow solution, averaged over each fiber.
    Vector v_d = v_lp, wsum = Vector::Zero(K), acc = Vector::Zero(K);
    for (std::size_t z = 0; z < m; ++z) {
      if (!M.active(z) || !(q[z] > 0)) continue;
      const double d = M.dG(z, q[z]);
      if (!std::isfinite(d)) continue;
      acc[M.sigma[z]] += q[z] * d;
      wsum[M.sigma[z]] += q[z];
    }
    for (std::size_t k = 0; k < K; ++k)
      if (wsum[k] > 0) v_d[k] = acc[k] / wsum[k];
    for (std::size_t z = 0; z < m; ++z)
      if (M.active(z) && M.wall_closed(z)) v_d[M.sigma[z]] = std::min(v_d[M.sigma[z]], M.wall(z));
    Vector q_dual2;
    best_lower = std::max(best_lower, M.shifted_dual(v_d, &q_dual2));
    offer(M, q_dual2, best);

    const double gap = best.value - best_lower;
    if (gap <= cfg.tol * std::max(1.0, std::abs(best.value))) {
      sol.converged = true;
      break;
    }

    h = std::max(0.5 * h, 1e-11);
    for (std::size_t z = 0; z < m; ++z) {
      if (!M.active(z) || !(M.r[z] > 0)) continue;
      auto& b = bps[z];
      // Sitting on the lower bound means the bound is binding; relax it.
      if (b[0] > 0 && q[z] <= b[0] * (1 + 1e-12)) b.insert(b.begin(), b[0] / 16);
      for (double t : {q[z], q[z] - h, q[z] + h, q[z] - 0.25 * h, q[z] + 0.25 * h})
        add_point(z, t);
      if (q_dual.size()) add_point(z, q_dual[z]);
      if (best.q.size()) add_point(z, best.q[z]);
      tidy(z);
    }
  }
  if (best.q.size() == 0) throw ConvergenceError("marginal penalty model never solved", kInf);

  TransportResult tr;
  sol.value = M.primal(best.q, &tr);
  sol.q = best.q;
  sol.coupling = std::move(tr.coupling);
  sol.lower_bound = best_lower;
  sol.certified_gap = std::max(0.0, sol.value - best_lower);
  sol.converged = sol.certified_gap <= cfg.tol * std::max(1.0, std::abs(sol.value));
  return sol;
}

// Entropic mirror descent on q. Zero-reference points with infinite
// recession never receive mass; every other point stays strictly positive.
PenaltySolution solve_mirror_descent(const Model& M, const SolverConfig& cfg) {
  const std::size_t m = M.m();
  const double psum = M.p.sum();
  std::size_t n_active = 0;
  for (std::size_t z = 0; z < m; ++z) n_active += M.active(z);
  Vector logq = Vector::Constant(m, -kInf);
  for (std::size_t z = 0; z < m; ++z)
    if (M.active(z)) logq[z] = std::log(0.5 * M.r[z] / std::max(M.r.sum(), 1e-300) + 0.5 / n_active);

  auto to_q = [&](const Vector& lq) {
    const double mx = lq.maxCoeff();
    Vector q = (lq.array() - mx).exp();
    return Vector(q * (psum / q.sum()));
  };

  PenaltySolution sol;
  sol.method = "mirror-descent";
  Candidate best;
  double best_lower = -kInf;
  for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
    const Vector q = to_q(logq);
    TransportResult tr;
    const double val = M.primal(q, &tr);
    if (val < best.value) best.value = val, best.q = q;
    // Potentials on price nodes are subgradients of the transport term.
    Vector v = -tr.potentials.psi;
    for (Eigen::Index k = 0; k < v.size(); ++k)
      if (!std::isfinite(v[k])) v[k] = 0;
    best_lower = std::max(best_lower, M.shifted_dual(v, nullptr));
    sol.iters = t;
    if (best.value - best_lower <= cfg.tol * std::max(1.0, std::abs(best.value))) break;

    Vector grad = Vector::Zero(m);
    double mean = 0;
    for (std::size_t z = 0; z < m; ++z) {
      if (!M.active(z)) continue;
      grad[z] = tr.potentials.psi[M.sigma[z]];
      mean += grad[z];
    }
    mean /= n_active;
    const double eta = cfg.step_scale / std::sqrt(static_cast<double>(t));
    for (std::size_t z = 0; z < m; ++z) {
      if (!M.active(z)) continue;
      double d = M.dG(z, q[z]);
      if (!std::isfinite(d)) d = d < 0 ? -1e6 : 1e6;
      logq[z] -= eta * (grad[z] - mean + d);
    }
    logq.array() -= logq.maxCoeff();
    // Keep iterates interior so f' stays finite.
    for (std::size_t z = 0; z < m; ++z)
      if (M.active(z)) logq[z] = std::max(logq[z], -700.0);
  }
  TransportResult tr;
  sol.value = M.primal(best.q, &tr);
  sol.q = best.q;
  sol.coupling = std::move(tr.coupling);
  sol.lower_bound = best_lower;
  sol.certified_gap = std::max(0.0, sol.value - best_lower);
  sol.converged = sol.certified_gap <= cfg.tol * std::max(1.0, std::abs(sol.value));
  return sol;
}

PenaltySolution solve_model(const Model& M, const SolverConfig& cfg) {
  if (M.g.shape() == GeneratorShape::Indicator) {
    // The penalty is +∞ unless q is the reference.
    PenaltySolution sol;
    TransportResult tr;
    sol.value = M.primal(M.r, &tr);
    sol.q = M.r;
    sol.coupling = std::move(tr.coupling);
    sol.lower_bound = sol.value;
    sol.converged = true;
    sol.method = "fixed";
    return sol;
  }
  bool any = false;
  for (std::size_t z = 0; z < M.m(); ++z) any = any || M.active(z);
  if (!any) throw InputError("reference has no mass and the generator forbids mass off it");
  if (cfg.method == SolverMethod::MirrorDescent) return solve_mirror_descent(M, cfg);
  return solve_refinement(M, cfg);
}

void validate_config(const SolverConfig& cfg) {
  if (cfg.max_iters == 0 || cfg.max_rounds == 0 || !(cfg.step_scale > 0) || !(cfg.tol > 0) ||
      cfg.brute_force_threshold == 0 || !(cfg.grid_resolution > 0))
    throw InputError("solver configuration values must be positive");
}

void check_lambda(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw InputError("lambda must be positive");
}

// Image of G, in increasing order, and the position of each G(z) in it.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> image_of(const PushforwardMap& G) {
  std::vector<std::size_t> img(G.mapping());
  std::sort(img.begin(), img.end());
  img.erase(std::unique(img.begin(), img.end()), img.end());
  std::vector<std::size_t> pos(G.source_size());
  for (std::size_t z = 0; z < pos.size(); ++z)
    pos[z] = std::lower_bound(img.begin(), img.end(), G(z)) - img.begin();
  return {img, pos};
}

void check_generator_model(const DiscreteDistribution& P_X, const DiscreteDistribution& P_Z,
                           const PushforwardMap& G, const FiniteMetricSpace& space) {
  if (P_X.size() != space.size()) throw InputError("P_X does not live on the space");
  if (P_Z.size() != G.source_size()) throw InputError("P_Z does not match G's source");
  if (G.target_size() != space.size()) throw InputError("G does not map into the space");
}

}  // namespace

void MarginalPenaltyProblem::validate() const {
  check_lambda(lambda);
  if (cost.rows() != fixed_marginal.size() || cost.cols() != reference.size())
    throw InputError("cost shape does not match the marginals");
}

double MarginalPenaltyProblem::objective(const Vector& q) const {
  const FGenerator g = generator.scaled(lambda);
  return wasserstein_primal(fixed_marginal.weights(), q, cost.values()).value +
         f_divergence(q, reference.weights(), g);
}

PenaltySolution solve_marginal_penalty(const MarginalPenaltyProblem& prob, const SolverConfig& cfg) {
  prob.validate();
  validate_config(cfg);
  Model M{prob.fixed_marginal.weights(), prob.cost.values(), {}, prob.reference.weights(),
          prob.generator.scaled(prob.lambda)};
  M.sigma.resize(prob.reference.size());
  std::iota(M.sigma.begin(), M.sigma.end(), 0);
  return solve_model(M, cfg);
}

PenaltySolution restricted_fgan(const DiscreteDistribution& P_X, const DiscreteDistribution& P_G,
                                const FGenerator& f, double lambda,
                                const FiniteMetricSpace& space, const SolverConfig& cfg) {
  if (P_X.size() != space.size() || P_G.size() != space.size())
    throw InputError("distributions do not live on the space");
  return solve_marginal_penalty({P_X, CostMatrix::from_space(space), f, lambda, P_G}, cfg);
}

FganDirectResult fgan_direct(const DiscreteDistribution& P_X, const DiscreteDistribution& P_G,
                             const FGenerator& f, double lambda, const FiniteMetricSpace& space) {
  check_lambda(lambda);
  const std::size_t n = space.size();
  if (P_X.size() != n || P_G.size() != n) throw InputError("distributions do not live on the space");
  const auto shape = f.shape();
  if (shape != GeneratorShape::PiecewiseLinear && shape != GeneratorShape::Indicator)
    throw UnsupportedGeneratorError("fgan_direct needs a piecewise-linear conjugate; got " +
                                    f.name() + " (use restricted_fgan)");
  const FGenerator g = f.scaled(lambda);

  // max Σ b_v y_v subject to y_s − y_t ≤ c_a is the dual of the min-cost
  // flow with supplies b; y = −π recovers it from the simplex potentials.
  FganDirectResult out;
  Vector h(n);
  if (shape == GeneratorShape::Indicator) {
    NetworkSimplex ns(n);
    for (std::size_t i = 0; i < n; ++i) ns.set_supply(i, P_X[i] - P_G[i]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) ns.add_arc(i, j, space.dist(i, j));
    if (ns.run() != NetworkSimplex::Status::Optimal)
      throw std::runtime_error("f-GAN LP did not solve");
    for (std::size_t i = 0; i < n; ++i) h[i] = -ns.potential(i);
    h.array() -= h.minCoeff();
  } else {
    // g*(y) = max(y, −Λ) on y ≤ Λ. Epigraph variables s_x ≥ h_x, s_x ≥ −Λ
    // and h_x ≤ Λ are differences against a ground node O with y_O = 0.
    const double Lam = g.conjugate_upper();
    const std::size_t O = 2 * n;
    NetworkSimplex ns(2 * n + 1);
    double b_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ns.set_supply(i, P_X[i]);
      ns.set_supply(n + i, -P_G[i]);
      b_sum += P_X[i] - P_G[i];
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) ns.add_arc(i, j, space.dist(i, j));
      ns.add_arc(i, O, Lam);
      ns.add_arc(i, n + i, 0.0);
      ns.add_arc(O, n + i, Lam);
    }
    ns.set_supply(O, -b_sum);
    if (ns.run() != NetworkSimplex::Status::Optimal)
      throw std::runtime_error("f-GAN LP did not solve");
    for (std::size_t i = 0; i < n; ++i)
      h[i] = std::min(Lam, ns.potential(O) - ns.potential(i));
  }
  double value = 0;
  for (std::size_t i = 0; i < n; ++i) {
    value += P_X[i] * h[i];
    if (P_G[i] > 0) value -= P_G[i] * g.conjugate(h[i]);
  }
  out.value = value;
  out.h.h = h;
  out.h.lipschitz_modulus = lipschitz_modulus(h, space.dist());
  return out;
}

Encoder Encoder::from_coupling(const Matrix& coupling, const Vector& p_x) {
  if (coupling.rows() != p_x.size()) throw InputError("coupling rows do not match P_X");
  Encoder E;
  E.matrix = Matrix::Constant(coupling.rows(), coupling.cols(), 1.0 / coupling.cols());
  for (Eigen::Index x = 0; x < coupling.rows(); ++x) {
    if (!(p_x[x] > 0)) continue;
    const double s = coupling.row(x).sum();
    if (s > 0) E.matrix.row(x) = coupling.row(x) / s;
  }
  return E;
}

Vector Encoder::aggregate(const Vector& p_x) const { return matrix.transpose() * p_x; }

WaeResult wae_objective(const DiscreteDistribution& P_X, const DiscreteDistribution& P_Z,
                        const PushforwardMap& G, const FiniteMetricSpace& space,
                        const FGenerator& f, double lambda, const SolverConfig& cfg) {
  check_lambda(lambda);
  validate_config(cfg);
  check_generator_model(P_X, P_Z, G, space);
  const std::size_t n = space.size(), m = P_Z.size();
  Model M{P_X.weights(), Matrix(n, m), {}, P_Z.weights(), f.scaled(lambda)};
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t z = 0; z < m; ++z) M.C(x, z) = space.dist(x, G(z));
  M.sigma.resize(m);
  std::iota(M.sigma.begin(), M.sigma.end(), 0);

  WaeResult out;
  out.solution = solve_model(M, cfg);
  out.encoder = Encoder::from_coupling(out.solution.coupling.matrix, P_X.weights());
  // Re-evaluate at the encoder itself: expected cost plus penalty on E#P_X.
  const Vector agg = out.encoder.aggregate(P_X.weights());
  double recon = 0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t z = 0; z < m; ++z) recon += P_X[x] * out.encoder.matrix(x, z) * M.C(x, z);
  out.value = recon + f_divergence(agg, P_Z.weights(), M.g);
  return out;
}

PenaltySolution fwae_objective(const DiscreteDistribution& P_X, const DiscreteDistribution& P_Z,
                               const PushforwardMap& G, const FiniteMetricSpace& space,
                               const FGenerator& f, double lambda, const SolverConfig& cfg) {
  check_lambda(lambda);
  validate_config(cfg);
  check_generator_model(P_X, P_Z, G, space);
  const std::size_t n = space.size();
  const auto [img, pos] = image_of(G);
  Model M{P_X.weights(), Matrix(n, img.size()), pos, P_Z.weights(), f.scaled(lambda)};
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t k = 0; k < img.size(); ++k) M.C(x, k) = space.dist(x, img[k]);
  PenaltySolution sol = solve_model(M, cfg);
  // Report the coupling over X × X.
  Matrix full = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < img.size(); ++k) full.col(img[k]) = sol.coupling.matrix.col(k);
  sol.coupling.matrix = full;
  sol.coupling.col_marginal = full.colwise().sum().transpose();
  return sol;
}

ReconstructionCheck reconstruction_bound_check(const Encoder& E, const PushforwardMap& G,
                                               const DiscreteDistribution& P_X,
                                               const FiniteMetricSpace& space) {
  const std::size_t n = space.size(), m = G.source_size();
  if (static_cast<std::size_t>(E.matrix.rows()) != n || static_cast<std::size_t>(E.matrix.cols()) != m ||
      P_X.size() != n || G.target_size() != n)
    throw InputError("encoder, G and P_X shapes do not match");
  const Vector agg = E.aggregate(P_X.weights());
  Vector recon = Vector::Zero(n);
  for (std::size_t z = 0; z < m; ++z) recon[G(z)] += agg[z];
  ReconstructionCheck out;
  out.lhs = wasserstein_primal(recon, P_X.weights(), space.dist()).value;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t z = 0; z < m; ++z) out.rhs += P_X[x] * E.matrix(x, z) * space.dist(x, G(z));
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

double gamma_star(const DiscreteDistribution& P_X, const DiscreteDistribution& P_G,
                  const FGenerator& f) {
  if (P_X.size() != P_G.size()) throw InputError("distributions live on different universes");
  const double d0 = f.deriv(0);
  if (!std::isfinite(d0)) return kInf;
  double best = 0;
  for (std::size_t i = 0; i < P_G.size(); ++i) {
    if (!(P_G[i] > 0)) continue;
    best = std::max(best, std::abs(f.deriv(P_X[i] / P_G[i]) - d0));
  }
  return best;
}

LambdaStarEstimate lambda_star_estimate(const DiscreteDistribution& P_G, const FGenerator& f,
                                        const FiniteMetricSpace& space, std::size_t n_samples,
                                        std::size_t refine_iters, std::uint64_t seed) {
  if (P_G.size() != space.size()) throw InputError("P_G does not live on the space");
  // With a finite recession constant P' may put mass where P_G has none.
  std::vector<std::size_t> supp = P_G.support();
  if (std::isfinite(f.recession())) {
    supp.resize(P_G.size());
    std::iota(supp.begin(), supp.end(), std::size_t{0});
  }
  const std::size_t s = supp.size();
  Vector g(s);
  Matrix C(s, s);
  for (std::size_t i = 0; i < s; ++i) {
    g[i] = P_G[supp[i]];
    for (std::size_t j = 0; j < s; ++j) C(i, j) = space.dist(supp[i], supp[j]);
  }
  auto ratio = [&](const Vector& pp) {
    const double d = f_divergence(pp, g, f);
    if (!(d > 0) || !std::isfinite(d)) return 0.0;
    return wasserstein_primal(pp, g, C).value / d;
  };

  LambdaStarEstimate out;
  Vector best_p = g;
  double best = 0;
  // Within 1e−6 of P_G both W and D_f are mostly cancellation error, so
  // such points feed the divergence probe but never the estimate.
  auto consider = [&](const Vector& pp) {
    const double r = ratio(pp);
    if (r > best && (pp - g).lpNorm<1>() >= 1e-6) best = r, best_p = pp;
    return r;
  };
  Rng rng(seed);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const auto w = rng.simplex(s);
    consider(Eigen::Map<const Vector>(w.data(), s));
  }

  // Two-point perturbations at shrinking scales; the ratio growing as the
  // scale shrinks means the supremum sits at P_G and is infinite.
  double coarse = 0, fine = 0;
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = 0; b < s; ++b) {
      if (a == b) continue;
      for (double t : {1.0, 0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-5}) {
        Vector pp = g;
        pp[a] += t * g[b];
        pp[b] -= t * g[b];
        const double r = consider(pp);
        if (t == 1e-2) coarse = std::max(coarse, r);
        if (t == 1e-5) fine = std::max(fine, r);
      }
    }
  out.diverging = fine > 10 * coarse && fine > 0;

  // Pairwise mass-moving local search from the best point.
  double step = 0.5;
  for (std::size_t it = 0; it < refine_iters && step > 1e-9; ++it) {
    bool improved = false;
    for (std::size_t a = 0; a < s && !improved; ++a)
      for (std::size_t b = 0; b < s && !improved; ++b) {
        if (a == b || !(best_p[b] > 0)) continue;
        Vector pp = best_p;
        const double mv = step * pp[b];
        pp[a] += mv;
        pp[b] -= mv;
        const double before = best;
        consider(pp);
        improved = best > before;
      }
    if (!improved) step *= 0.5;
  }
  out.value = best;
  out.argmax = Vector::Zero(space.size());
  for (std::size_t i = 0; i < s; ++i) out.argmax[supp[i]] = best_p[i];
  return out;
}

}  // namespace dualgap
