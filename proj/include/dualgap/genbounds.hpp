#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualgap/fgen.hpp"
#include "dualgap/random.hpp"
#include "dualgap/space.hpp"

namespace dualgap {

// A bounded distribution and the finite reference it is measured against.
// uniform-square is the continuous uniform law on [0,1]², represented by its
// K×K cell centres; a sample is the centre of the cell it falls in. Both
// grid kinds use the Manhattan metric so transport runs on lattice arcs.
struct SampledDistributionSpec {
  enum class Kind { UniformSquare, UniformGrid, MixtureOfPoints };
  Kind kind = Kind::UniformSquare;
  std::size_t grid_size = 64;
  Matrix atoms;    // mixture: one point per row (Euclidean metric)
  Vector weights;  // mixture weights

  static SampledDistributionSpec uniform_square(std::size_t reference_grid = 64);
  static SampledDistributionSpec uniform_grid(std::size_t k);
  static SampledDistributionSpec mixture(Matrix atoms, Vector weights);
  // Two atoms at distance 1 with equal weight.
  static SampledDistributionSpec two_point();
  static SampledDistributionSpec parse(const std::string& name, std::size_t grid_size = 64);

  void validate() const;
};

class ReferenceMeasure {
 public:
  explicit ReferenceMeasure(const SampledDistributionSpec& spec);

  std::size_t size() const { return weights_.size(); }
  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  // Diameter of the support under the reference metric.
  double diameter() const { return diameter_; }
  Matrix distances() const;

  std::size_t sample_index(Rng& rng) const;
  // Empirical measure of n i.i.d. draws, as weights over the reference points.
  Vector empirical(std::size_t n, Rng& rng) const;
  // IPM over 1-Lipschitz functions (= W1) between the reference and `other`.
  double ipm_to(const Vector& other) const;
  double wasserstein(const Vector& a, const Vector& b) const;

 private:
  Matrix points_;
  Vector weights_;
  std::vector<double> cdf_;
  std::optional<GraphMetric> graph_;
  Matrix dense_;  // mixture only
  double diameter_ = 0;
};

// (Δ/2)·sqrt((2/n)·ln(1/δ)).
double mcdiarmid_term(double diameter, std::size_t n, double delta);

struct RateCurve {
  struct Row {
    std::size_t n, trial;
    double ipm, bound_term;
  };
  std::vector<Row> rows;
  std::vector<std::size_t> ns;
  std::vector<double> medians;
  // Least squares of log median on log n over ns with a positive median.
  bool fitted = false;
  double slope = 0, intercept = 0;
  std::size_t flagged_trials = 0;
};

// bound_term in each row uses delta.
RateCurve empirical_ipm_curve(const SampledDistributionSpec& spec, const std::vector<std::size_t>& ns,
                              std::size_t trials, std::uint64_t seed, double delta = 0.1);

struct ConcentrationResult {
  double violation_fraction = 0;
  double bound_term = 0;
  double mean = 0;
  double allowed = 0;  // δ + 2·sqrt(δ(1−δ)/trials)
  bool pass = false;
};

ConcentrationResult concentration_check(const SampledDistributionSpec& spec, std::size_t n,
                                        std::size_t trials, double delta, std::uint64_t seed);

struct CoveringBounds {
  std::size_t upper = 0;  // greedy farthest-point cover with centres on the points
  std::size_t lower = 0;  // size of a 2η-separated subset: no ball holds two of them
};

// Euclidean balls; points are rows.
CoveringBounds covering_number(const Matrix& points, double eta);

struct DimensionRow {
  double eta;
  std::size_t cover_size;
  double dimension;  // log N / (−log η)
};

struct DimensionProfile {
  std::vector<DimensionRow> rows;
  // Heuristic: max of the dimensions at the two smallest η.
  double d_star_estimate = 0;
};

// Greedily covers mass ≥ 1 − τ of the empirical measure of sample_n draws
// with η-balls centred on sample points.
DimensionProfile covering_dimension_profile(const SampledDistributionSpec& spec,
                                            const std::vector<double>& etas, double tau,
                                            std::size_t sample_n, std::uint64_t seed);

struct Theorem4Row {
  std::size_t n, trial;
  double lhs, rhs, slack, decay;  // slack = rhs − lhs ≥ −decay is asserted
};

struct Theorem4Report {
  double lhs = 0;
  bool two_sided = false;  // TV: both samples empirical; otherwise P_G stays exact
  std::vector<Theorem4Row> rows;
  std::vector<double> median_negative_slack;  // per n
  std::size_t inversions = 0;
  bool rhs_finite = true;
  bool pass = false;
};

// LHS is the restricted f-GAN value between the two references; RHS is the
// f-WAE value (identity G) with one or both references replaced by empirical
// measures. For every trial the slack must exceed minus the exact transport
// distances of the samples to their references; the median negative part
// must shrink with n up to one inversion.
Theorem4Report verify_theorem4_structure(const SampledDistributionSpec& spec_x,
                                         const SampledDistributionSpec& spec_g,
                                         const FGenerator& f, double lambda,
                                         const std::vector<std::size_t>& ns, std::size_t trials,
                                         double delta, std::uint64_t seed);

}  // namespace dualgap
