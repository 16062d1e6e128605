#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "dualgap/fgen.hpp"
#include "dualgap/ot.hpp"
#include "dualgap/space.hpp"

namespace dualgap {

// J(q) = W_C(fixed_marginal, q) + λ·D_f(q, reference) over the simplex of the
// free universe (the columns of C).
struct MarginalPenaltyProblem {
  DiscreteDistribution fixed_marginal;
  CostMatrix cost;
  FGenerator generator;
  double lambda;
  DiscreteDistribution reference;

  // Throws InputError on shape mismatch or λ ≤ 0.
  void validate() const;
  // Exact objective; +∞ where the divergence is infinite.
  double objective(const Vector& q) const;
};

enum class SolverMethod {
  Auto,           // refinement for every generator, fixed q for the indicator
  Refinement,     // piecewise-linear outer model solved as min-cost flow
  MirrorDescent,  // entropic mirror descent with step step_scale/√t
};

struct SolverConfig {
  std::size_t max_iters = 2000;  // mirror-descent iterations
  std::size_t max_rounds = 80;   // refinement rounds
  double step_scale = 0.5;
  double tol = 1e-9;  // absolute certified gap target (scaled by max(1,|value|))
  // Settings for the brute-force grid oracle used to cross-check small
  // free universes.
  std::size_t brute_force_threshold = 3;
  double grid_resolution = 1e-4;
  SolverMethod method = SolverMethod::Auto;
};

struct PenaltySolution {
  double value = 0;  // J at q
  Vector q;
  Coupling coupling;           // optimal coupling of the reconstruction term
  double lower_bound = 0;      // a dual objective value, so value − lower_bound ≥ J − J*
  double certified_gap = 0;    // value − lower_bound
  std::size_t iters = 0;
  bool converged = false;
  std::string method;
};

PenaltySolution solve_marginal_penalty(const MarginalPenaltyProblem& prob,
                                       const SolverConfig& cfg = {});

// min over P' of W_c(P', P_X) + λ D_f(P', P_G), i.e. the f-GAN objective with
// 1-Lipschitz discriminators.
PenaltySolution restricted_fgan(const DiscreteDistribution& P_X, const DiscreteDistribution& P_G,
                                const FGenerator& f, double lambda,
                                const FiniteMetricSpace& space, const SolverConfig& cfg = {});

struct FganDirectResult {
  double value = 0;
  DualPotentials h;
};

// Direct LP over discriminators h with |h_i − h_j| ≤ c_ij. Only generators
// whose conjugate is piecewise linear (TV, indicator); others throw
// UnsupportedGeneratorError.
FganDirectResult fgan_direct(const DiscreteDistribution& P_X, const DiscreteDistribution& P_G,
                             const FGenerator& f, double lambda, const FiniteMetricSpace& space);

struct Encoder {
  Matrix matrix;  // rows: x, columns: z; each row a conditional distribution

  // E(z|x) = π(x,z)/p_x, uniform where p_x = 0.
  static Encoder from_coupling(const Matrix& coupling, const Vector& p_x);
  Vector aggregate(const Vector& p_x) const;  // E#P_X
};

struct WaeResult {
  double value = 0;
  Encoder encoder;
  PenaltySolution solution;
};

// Expected reconstruction cost plus λ·D_f(E#P_X, P_Z), minimized over encoders.
WaeResult wae_objective(const DiscreteDistribution& P_X, const DiscreteDistribution& P_Z,
                        const PushforwardMap& G, const FiniteMetricSpace& space,
                        const FGenerator& f, double lambda, const SolverConfig& cfg = {});

// W_c(P_X, G#q) + λ·D_f(q, P_Z) minimized over aggregate posteriors q. Solved
// on its own formulation (transport between X and the image of G), so it is
// an independent route to the same optimum as wae_objective.
PenaltySolution fwae_objective(const DiscreteDistribution& P_X, const DiscreteDistribution& P_Z,
                               const PushforwardMap& G, const FiniteMetricSpace& space,
                               const FGenerator& f, double lambda, const SolverConfig& cfg = {});

struct ReconstructionCheck {
  double lhs = 0, rhs = 0;
  bool holds = false;
};

// lhs = W_c((G∘E)#P_X, P_X), rhs = expected cost of reconstructing through E.
ReconstructionCheck reconstruction_bound_check(const Encoder& E, const PushforwardMap& G,
                                               const DiscreteDistribution& P_X,
                                               const FiniteMetricSpace& space);

// max over supp(P_G) of |f'(p/g) − f'(0)|; +∞ when f'(0) = −∞.
double gamma_star(const DiscreteDistribution& P_X, const DiscreteDistribution& P_G,
                  const FGenerator& f);

struct LambdaStarEstimate {
  double value = 0;
  Vector argmax;
  // The ratio kept growing as perturbations of P_G shrank, which happens
  // for generators differentiable at 1; the supremum is then infinite.
  bool diverging = false;
};

// Lower bound on sup_{P'} W_c(P', P_G) / D_f(P', P_G) from random simplex
// points, two-point perturbations of P_G, and pairwise mass-moving search.
LambdaStarEstimate lambda_star_estimate(const DiscreteDistribution& P_G, const FGenerator& f,
                                        const FiniteMetricSpace& space, std::size_t n_samples,
                                        std::size_t refine_iters, std::uint64_t seed = 0);

}  // namespace dualgap
