#pragma once

// Slow, independent reference computations used only by tests. None of these
// call the network simplex, the marginal-penalty solver or the closed-form
// conjugates.

#include <cstddef>
#include <string>

#include "dualgap/fgen.hpp"
#include "dualgap/space.hpp"

namespace oracle {

using dualgap::FGenerator;
using dualgap::Matrix;
using dualgap::Vector;

// Transport cost by enumerating every spanning tree of the bipartite support
// graph (basic solutions of the transportation polytope). n·m ≤ 16.
double transport_by_trees(const Vector& p, const Vector& q, const Matrix& cost);

// max_ψ Σ q_j ψ_j + Σ p_i min_j (C_ij − ψ_j) over the vertices of the
// breakpoint arrangement, ψ_0 = 0. Exact for at most three columns.
double transport_by_dual_vertices(const Vector& p, const Vector& q, const Matrix& cost);

// Σ r f(q/r) with the recession convention, from f.eval alone.
double divergence(const Vector& q, const Vector& r, const FGenerator& f);

// min_q W_C(p, q) + λ D_f(q, r) over the simplex of the columns (≤ 3) by a
// grid of the given resolution followed by nested zooms around the best cell.
struct PenaltyMin {
  double value;
  Vector q;
};
PenaltyMin penalty_grid(const Vector& p, const Matrix& cost, const FGenerator& f, double lambda,
                        const Vector& r, double resolution);

// sup_{x ≥ 0} x·y − f(x): the bracket doubles until the concave objective
// turns down, then golden-section search. The point x = 1 is always tried.
double conjugate_golden(const FGenerator& f, double y);

// E|K/n − ½| for K ~ Binomial(n, ½), summed exactly in log space.
double binomial_mean_abs_deviation(std::size_t n);
// P(|K/n − ½| > t).
double binomial_deviation_tail(std::size_t n, double t);

// sup_t W/D_f on a two-point space at distance d with P_G = (g, 1−g),
// P' = (t, 1−t) swept on a grid of the given step.
double lambda_star_two_point(const FGenerator& f, double g, double d, double step);

}  // namespace oracle
