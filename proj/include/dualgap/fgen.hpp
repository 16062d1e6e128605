#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "dualgap/space.hpp"

namespace dualgap {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class GeneratorShape {
  Smooth,           // twice differentiable on (0,∞), conjugate smooth on its domain
  PiecewiseLinear,  // conjugate piecewise linear (TV)
  Indicator,        // f = 0 at 1, +∞ elsewhere
  General           // user-defined; may have kinks
};

// One term of a user-defined generator: coef·x^power, coef·x·ln x,
// coef·ln x, or coef·|x − shift|.
struct GeneratorTerm {
  enum class Kind { Power, XLogX, Log, Abs };
  Kind kind;
  double coef = 1;
  double param = 0;  // power for Power, shift for Abs
};

// Convex f on [0,∞) with f(1) = 0, +∞ on negative arguments. Immutable value
// type; copies share the underlying definition.
class FGenerator {
 public:
  struct Impl;

  // Names: tv, kl, reverse-kl, chi2 (alias chi-squared), js, gan, indicator.
  static FGenerator builtin(const std::string& name);
  static std::vector<std::string> builtin_names();
  // Terms are summed and shifted so that f(1) = 0. Throws InputError if the
  // result fails the midpoint convexity test on (0,10].
  static FGenerator custom(const std::string& name, std::vector<GeneratorTerm> terms);

  const std::string& name() const;
  GeneratorShape shape() const;
  double scale() const { return scale_; }
  // λf, with (λf)* (y) = λ f*(y/λ).
  FGenerator scaled(double lambda) const;
  FGenerator unscaled() const;

  double eval(double t) const;
  // Right derivative; deriv(0) may be −∞.
  double deriv(double t) const;
  double deriv2(double t) const;
  double recession() const;
  // False when f has a kink at 1 (TV, indicator).
  bool differentiable_at_one() const;

  double conjugate(double y) const;
  // Maximizer x(y) of x·y − f(x), i.e. the derivative of f*.
  double conjugate_deriv(double y) const;
  double conjugate_deriv2(double y) const;
  // f* is finite on (−∞, upper) or (−∞, upper].
  double conjugate_upper() const;
  bool conjugate_upper_closed() const;
  bool in_conjugate_domain(double y) const;

 private:
  FGenerator(std::shared_ptr<const Impl> impl, double scale) : impl_(std::move(impl)), scale_(scale) {}
  std::shared_ptr<const Impl> impl_;
  double scale_ = 1;
};

// Grid over [0, x_max] plus golden-section refinement around the best grid
// point. Only ever reports an attained value, so the result is ≤ f*(y).
double conjugate_numeric(const FGenerator& f, double y, double x_max, double resolution);

// λ·f*(y/λ). Throws InputError for λ ≤ 0.
double scale_conjugate(const FGenerator& f, double lambda, double y);

// Σ_{q>0} q f(p/q) + Σ_{q=0,p>0} p·recession. The indicator is exact: 0 when
// the weights agree to 1e-12, +∞ otherwise.
double f_divergence(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                    const FGenerator& f);
double f_divergence(const Vector& p, const Vector& q, const FGenerator& f);

}  // namespace dualgap
