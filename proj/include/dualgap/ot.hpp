#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dualgap/space.hpp"

namespace dualgap {

struct Coupling {
  Matrix matrix;
  Vector row_marginal;
  Vector col_marginal;

  // Largest deviation of row/column sums from the marginals.
  double marginal_error() const;
};

struct DualPotentials {
  // Lipschitz form over a single universe (empty in the (φ,ψ) form).
  Vector h;
  // General-cost form: φ_i + ψ_j ≤ c_ij.
  Vector phi, psi;
  double lipschitz_modulus = 0;
};

struct TransportResult {
  double value = 0;
  Coupling coupling;
  // Basis potentials, extended to zero-mass points by c-transforms, so that
  // φ_i + ψ_j ≤ c_ij everywhere and ψ is a subgradient of the value in Q.
  DualPotentials potentials;
  std::size_t pivots = 0;
};

struct DualResult {
  double value = 0;
  DualPotentials potentials;
  std::size_t pivots = 0;
};

struct SinkhornConfig {
  double tol = 1e-9;
  std::size_t max_iters = 100000;
};

struct SinkhornResult {
  double value = 0;
  Coupling coupling;
  std::size_t iters = 0;
  double marginal_error = 0;
};

// max_{i≠j} |h_i − h_j| / d_ij.
double lipschitz_modulus(const Vector& h, const Matrix& dist);

TransportResult wasserstein_primal(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                                   const CostMatrix& cost);
// Same LP for raw weight vectors (used by solvers whose iterates are only
// approximately normalized).
TransportResult wasserstein_primal(const Vector& p, const Vector& q, const Matrix& cost);

// Solves max Σ h_i (p_i − q_i) over 1-Lipschitz h as the dual of the
// transshipment problem on the complete graph; h is shifted so min h = 0.
DualResult kantorovich_dual(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                            const FiniteMetricSpace& space);
// Throws ContractError unless the cost is metric-certified.
DualResult kantorovich_dual(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                            const CostMatrix& cost);
// Shortest-path metric of a sparse graph; only the graph's arcs are priced.
DualResult kantorovich_dual(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                            const GraphMetric& graph);

// min ⟨C,π⟩ + ε KL(π ‖ P⊗Q) by log-domain Sinkhorn with ε-annealing. The
// returned coupling is rounded onto the exact transport polytope.
SinkhornResult sinkhorn(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                        const CostMatrix& cost, double epsilon, const SinkhornConfig& cfg = {});

// family: "bounded1" or "lipschitz".
double ipm(const DiscreteDistribution& P, const DiscreteDistribution& Q, const std::string& family,
           const FiniteMetricSpace& space);
double ipm(const DiscreteDistribution& P, const DiscreteDistribution& Q,
           const std::vector<Vector>& family);

}  // namespace dualgap
