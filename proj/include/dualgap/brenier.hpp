#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dualgap/space.hpp"

namespace dualgap {

// Uniform source on an axis-aligned box (continuous, or the nodes of a
// lattice with `grid_points` per axis) and weighted target atoms.
struct SemiDiscreteProblem {
  enum class Sampler { UniformBox, UniformGrid };
  Matrix atoms;  // m × d, one atom per row
  Vector nu;     // target weights
  Vector lo, hi;  // box corners, length d
  Sampler sampler = Sampler::UniformBox;
  std::size_t grid_points = 101;

  std::size_t dim() const { return atoms.cols(); }
  std::size_t size() const { return atoms.rows(); }
  void validate() const;
  // n source points; chunks of the sample are seeded independently so the
  // result does not depend on the thread count.
  Matrix sample(std::size_t n, std::uint64_t seed) const;
};

// φ_h(x) = max_i (x·y_i + h_i).
struct BrenierPotential {
  Vector h;

  double phi(const Matrix& atoms, const Vector& x) const;
  // Shifted so that min h = 0.
  BrenierPotential normalized() const;
};

// argmax_i (x·y_i + h_i); ties go to the lowest index.
std::size_t assign_cell(const BrenierPotential& h, const Matrix& atoms, const Vector& x);

// Fraction of the given points in each cell; sums to 1 exactly up to rounding.
Vector cell_masses(const BrenierPotential& h, const Matrix& atoms, const Matrix& points);
Vector cell_masses(const BrenierPotential& h, const SemiDiscreteProblem& prob,
                   std::size_t n_samples, std::uint64_t seed);

// F(h) = Σ ν_i h_i − mean φ_h over the points; concave, with gradient
// ν − cell_masses away from cell boundaries.
double dual_objective(const BrenierPotential& h, const SemiDiscreteProblem& prob,
                      const Matrix& points);

struct FitConfig {
  std::size_t n_samples = 100000;
  std::size_t max_iters = 2000;
  double step = 1.0;
  double tol = 1e-3;
  std::uint64_t seed = 0;
};

struct FitResult {
  BrenierPotential h;  // normalized
  double residual = 0;  // max_i |mass_i − ν_i| on the fitting sample
  bool converged = false;
  std::size_t iters = 0;
  std::vector<double> residual_history;  // one entry per accepted step
};

// Gradient ascent on F over one fixed sample set, with backtracking that
// accepts a step only if F does not drop and the residual does not grow.
FitResult fit_potential(const SemiDiscreteProblem& prob, const FitConfig& cfg);

struct PushforwardCheck {
  double tv_error = 0;  // ½ Σ |mass_i − ν_i| on a fresh sample
  bool pass = false;
};

PushforwardCheck pushforward_check(const BrenierPotential& h, const SemiDiscreteProblem& prob,
                                   const Vector& nu, std::size_t n_samples, std::uint64_t seed,
                                   double tol);

}  // namespace dualgap
