#include "dualgap/genbounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dualgap/duality.hpp"
#include "dualgap/errors.hpp"
#include "dualgap/ot.hpp"
#include "dualgap/parallel.hpp"

namespace dualgap {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

void check_ns(const std::vector<std::size_t>& ns, std::size_t trials) {
  if (ns.empty()) throw InputError("need at least one sample size");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] == 0) throw InputError("sample sizes must be positive");
    if (i > 0 && ns[i] <= ns[i - 1]) throw InputError("sample sizes must be strictly increasing");
  }
  if (trials < 2) throw InputError("need at least two trials");
}

void check_delta(double delta) {
  if (!(delta > 0 && delta < 1)) throw InputError("delta must lie in (0,1)");
}

// Sample seeds depend on (n index, trial) only, so curves are reproducible
// under any thread count.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t n_index, std::size_t trial) {
  return derive_seed(derive_seed(seed, n_index), trial);
}

}  // namespace

SampledDistributionSpec SampledDistributionSpec::uniform_square(std::size_t reference_grid) {
  SampledDistributionSpec s;
  s.kind = Kind::UniformSquare;
  s.grid_size = reference_grid;
  return s;
}

SampledDistributionSpec SampledDistributionSpec::uniform_grid(std::size_t k) {
  SampledDistributionSpec s;
  s.kind = Kind::UniformGrid;
  s.grid_size = k;
  return s;
}

SampledDistributionSpec SampledDistributionSpec::mixture(Matrix atoms, Vector weights) {
  SampledDistributionSpec s;
  s.kind = Kind::MixtureOfPoints;
  s.atoms = std::move(atoms);
  s.weights = std::move(weights);
  s.validate();
  return s;
}

SampledDistributionSpec SampledDistributionSpec::two_point() {
  Matrix a(2, 1);
  a << 0, 1;
  return mixture(a, Vector::Constant(2, 0.5));
}

SampledDistributionSpec SampledDistributionSpec::parse(const std::string& name,
                                                       std::size_t grid_size) {
  if (name == "uniform-square") return uniform_square(grid_size);
  if (name == "uniform-grid") return uniform_grid(grid_size);
  if (name == "two-point") return two_point();
  if (name == "point-mass") return mixture(Matrix::Zero(1, 1), Vector::Ones(1));
  throw InputError("unknown distribution: " + name +
                   " (uniform-square, uniform-grid, two-point, point-mass)");
}

void SampledDistributionSpec::validate() const {
  if (kind == Kind::MixtureOfPoints) {
    if (atoms.rows() == 0 || atoms.rows() != weights.size())
      throw InputError("mixture needs one weight per atom");
    if (!atoms.allFinite()) throw InputError("mixture atoms must be finite");
    DiscreteDistribution::normalized(weights);
  } else if (grid_size < 1) {
    throw InputError("grid size must be at least 1");
  }
}

ReferenceMeasure::ReferenceMeasure(const SampledDistributionSpec& spec) {
  spec.validate();
  if (spec.kind == SampledDistributionSpec::Kind::MixtureOfPoints) {
    points_ = spec.atoms;
    weights_ = DiscreteDistribution::normalized(spec.weights).weights();
    const auto n = points_.rows();
    dense_ = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) dense_(i, j) = (points_.row(i) - points_.row(j)).norm();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (weights_[i] > 0 && weights_[j] > 0) diameter_ = std::max(diameter_, dense_(i, j));
  } else {
    const std::size_t K = spec.grid_size;
    const bool cells = spec.kind == SampledDistributionSpec::Kind::UniformSquare;
    // Cell centres for the continuous law, lattice points for the grid law.
    const double h = cells ? 1.0 / K : (K > 1 ? 1.0 / (K - 1) : 1.0);
    const double off = cells ? 0.5 * h : 0.0;
    points_.resize(K * K, 2);
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) {
        points_(i * K + j, 0) = off + i * h;
        points_(i * K + j, 1) = off + j * h;
      }
    weights_ = Vector::Constant(K * K, 1.0 / (K * K));
    graph_ = GraphMetric::grid(K, h);
    diameter_ = 2.0 * (K - 1) * h;
  }
  cdf_.resize(weights_.size());
  double s = 0;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) cdf_[i] = (s += weights_[i]);
}

Matrix ReferenceMeasure::distances() const { return graph_ ? graph_->distances() : dense_; }

std::size_t ReferenceMeasure::sample_index(Rng& rng) const {
  if (graph_) return rng.index(weights_.size());
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
}

Vector ReferenceMeasure::empirical(std::size_t n, Rng& rng) const {
  if (n == 0) throw InputError("empirical measure needs at least one sample");
  Vector w = Vector::Zero(weights_.size());
  for (std::size_t k = 0; k < n; ++k) w[sample_index(rng)] += 1;
  return w / static_cast<double>(n);
}

double ReferenceMeasure::wasserstein(const Vector& a, const Vector& b) const {
  const DiscreteDistribution A = DiscreteDistribution::normalized(a);
  const DiscreteDistribution B = DiscreteDistribution::normalized(b);
  if (graph_) return kantorovich_dual(A, B, *graph_).value;
  return kantorovich_dual(A, B, FiniteMetricSpace({}, dense_)).value;
}

double ReferenceMeasure::ipm_to(const Vector& other) const { return wasserstein(weights_, other); }

double mcdiarmid_term(double diameter, std::size_t n, double delta) {
  check_delta(delta);
  return 0.5 * diameter * std::sqrt(2.0 / n * std::log(1.0 / delta));
}

RateCurve empirical_ipm_curve(const SampledDistributionSpec& spec, const std::vector<std::size_t>& ns,
                              std::size_t trials, std::uint64_t seed, double delta) {
  check_ns(ns, trials);
  check_delta(delta);
  const ReferenceMeasure ref(spec);
  RateCurve curve;
  curve.ns = ns;
  curve.rows.resize(ns.size() * trials);
  std::vector<char> flagged(curve.rows.size(), 0);
  parallel_for(curve.rows.size(), [&](std::size_t idx) {
    const std::size_t ni = idx / trials, t = idx % trials;
    Rng rng(trial_seed(seed, ni, t));
    auto& row = curve.rows[idx];
    row.n = ns[ni];
    row.trial = t;
    row.bound_term = mcdiarmid_term(ref.diameter(), ns[ni], delta);
    try {
      row.ipm = ref.ipm_to(ref.empirical(ns[ni], rng));
    } catch (const std::runtime_error&) {
      row.ipm = std::numeric_limits<double>::quiet_NaN();
      flagged[idx] = 1;
    }
  });
  curve.flagged_trials = std::count(flagged.begin(), flagged.end(), 1);

  std::vector<double> lx, ly;
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    std::vector<double> v;
    for (std::size_t t = 0; t < trials; ++t) {
      const double x = curve.rows[ni * trials + t].ipm;
      if (!std::isnan(x)) v.push_back(x);
    }
    const double med = median(v);
    curve.medians.push_back(med);
    if (med > 0) lx.push_back(std::log(double(ns[ni]))), ly.push_back(std::log(med));
  }
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    curve.fitted = true;
    curve.slope = sxy / sxx;
    curve.intercept = my - curve.slope * mx;
  }
  return curve;
}

ConcentrationResult concentration_check(const SampledDistributionSpec& spec, std::size_t n,
                                        std::size_t trials, double delta, std::uint64_t seed) {
  check_delta(delta);
  if (n == 0 || trials == 0) throw InputError("n and trials must be positive");
  const ReferenceMeasure ref(spec);
  std::vector<double> vals(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(trial_seed(seed, 0, t));
    vals[t] = ref.ipm_to(ref.empirical(n, rng));
  });
  ConcentrationResult r;
  r.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / trials;
  r.bound_term = mcdiarmid_term(ref.diameter(), n, delta);
  const auto over = std::count_if(vals.begin(), vals.end(),
                                  [&](double v) { return v > r.mean + r.bound_term; });
  r.violation_fraction = double(over) / trials;
  r.allowed = delta + 2 * std::sqrt(delta * (1 - delta) / trials);
  r.pass = r.violation_fraction <= r.allowed;
  return r;
}

CoveringBounds covering_number(const Matrix& points, double eta) {
  if (!(eta > 0)) throw InputError("eta must be positive");
  const auto n = points.rows();
  CoveringBounds b;
  if (n == 0) return b;
  // Farthest-point greedy: the next centre is the point farthest from all
  // current centres, until every point is within η.
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  Eigen::Index next = 0;
  while (true) {
    ++b.upper;
    for (Eigen::Index i = 0; i < n; ++i)
      dist[i] = std::min(dist[i], (points.row(i) - points.row(next)).norm());
    const auto it = std::max_element(dist.begin(), dist.end());
    if (*it <= eta) break;
    next = it - dist.begin();
  }
  // Greedy maximal set with pairwise distances > 2η.
  std::vector<Eigen::Index> sep;
  for (Eigen::Index i = 0; i < n; ++i) {
    bool ok = true;
    for (auto j : sep)
      if ((points.row(i) - points.row(j)).norm() <= 2 * eta) {
        ok = false;
        break;
      }
    if (ok) sep.push_back(i);
  }
  b.lower = sep.size();
  return b;
}

DimensionProfile covering_dimension_profile(const SampledDistributionSpec& spec,
                                            const std::vector<double>& etas, double tau,
                                            std::size_t sample_n, std::uint64_t seed) {
  if (!(tau >= 0 && tau < 1)) throw InputError("tau must lie in [0,1)");
  if (sample_n == 0) throw InputError("sample_n must be positive");
  for (double e : etas)
    if (!(e > 0 && e < 1)) throw InputError("eta values must lie in (0,1)");
  const ReferenceMeasure ref(spec);
  Rng rng(seed);
  const Vector emp = ref.empirical(sample_n, rng);
  std::vector<Eigen::Index> pts;
  for (Eigen::Index i = 0; i < emp.size(); ++i)
    if (emp[i] > 0) pts.push_back(i);
  const std::size_t m = pts.size();
  Matrix P(m, ref.points().cols());
  Vector w(m);
  for (std::size_t i = 0; i < m; ++i) P.row(i) = ref.points().row(pts[i]), w[i] = emp[pts[i]];

  DimensionProfile prof;
  for (double eta : etas) {
    // Greedy: repeatedly take the ball covering the most uncovered mass.
    std::vector<char> covered(m, 0);
    double mass = 0;
    std::size_t count = 0;
    while (mass < 1 - tau - 1e-12) {
      double best = -1;
      std::size_t arg = 0;
      for (std::size_t c = 0; c < m; ++c) {
        double s = 0;
        for (std::size_t i = 0; i < m; ++i)
          if (!covered[i] && (P.row(i) - P.row(c)).norm() <= eta) s += w[i];
        if (s > best) best = s, arg = c;
      }
      for (std::size_t i = 0; i < m; ++i)
        if (!covered[i] && (P.row(i) - P.row(arg)).norm() <= eta) covered[i] = 1, mass += w[i];
      ++count;
    }
    count = std::max<std::size_t>(count, 1);
    prof.rows.push_back({eta, count, std::log(double(count)) / -std::log(eta)});
  }
  std::vector<DimensionRow> sorted = prof.rows;
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.eta < b.eta; });
  for (std::size_t i = 0; i < std::min<std::size_t>(2, sorted.size()); ++i)
    prof.d_star_estimate = std::max(prof.d_star_estimate, sorted[i].dimension);
  return prof;
}

Theorem4Report verify_theorem4_structure(const SampledDistributionSpec& spec_x,
                                         const SampledDistributionSpec& spec_g,
                                         const FGenerator& f, double lambda,
                                         const std::vector<std::size_t>& ns, std::size_t trials,
                                         double delta, std::uint64_t seed) {
  check_ns(ns, trials);
  check_delta(delta);
  const ReferenceMeasure rx(spec_x), rg(spec_g);

  // Both references must live on one universe: the same lattice, or the
  // union of the mixture atoms.
  Matrix dist;
  Vector px, pg;
  std::vector<std::size_t> map_x, map_g;
  const bool grid_x = spec_x.kind != SampledDistributionSpec::Kind::MixtureOfPoints;
  const bool grid_g = spec_g.kind != SampledDistributionSpec::Kind::MixtureOfPoints;
  if (grid_x != grid_g || (grid_x && (spec_x.grid_size != spec_g.grid_size || spec_x.kind != spec_g.kind)))
    throw InputError("theorem 4 references must share one universe");
  if (grid_x) {
    dist = rx.distances();
    px = rx.weights();
    pg = rg.weights();
    map_x.resize(rx.size());
    std::iota(map_x.begin(), map_x.end(), 0);
    map_g = map_x;
  } else {
    if (rx.points().cols() != rg.points().cols()) throw InputError("atoms differ in dimension");
    std::vector<Eigen::VectorXd> pts;
    auto index_of = [&](const Eigen::VectorXd& p) {
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (pts[i] == p) return i;
      pts.push_back(p);
      return pts.size() - 1;
    };
    for (Eigen::Index i = 0; i < rx.points().rows(); ++i)
      map_x.push_back(index_of(rx.points().row(i).transpose()));
    for (Eigen::Index i = 0; i < rg.points().rows(); ++i)
      map_g.push_back(index_of(rg.points().row(i).transpose()));
    const auto n = pts.size();
    dist.resize(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) dist(i, j) = (pts[i] - pts[j]).norm();
    px = Vector::Zero(n);
    pg = Vector::Zero(n);
    for (std::size_t i = 0; i < map_x.size(); ++i) px[map_x[i]] += rx.weights()[i];
    for (std::size_t i = 0; i < map_g.size(); ++i) pg[map_g[i]] += rg.weights()[i];
  }
  const FiniteMetricSpace space({}, dist);
  const std::size_t N = dist.rows();
  const auto lift = [&](const Vector& w, const std::vector<std::size_t>& map) {
    Vector out = Vector::Zero(N);
    for (std::size_t i = 0; i < map.size(); ++i) out[map[i]] += w[i];
    return out;
  };
  const DiscreteDistribution PX = DiscreteDistribution::normalized(px);
  const DiscreteDistribution PG = DiscreteDistribution::normalized(pg);
  const CostMatrix C = CostMatrix::from_space(space);

  Theorem4Report rep;
  rep.two_sided = f.shape() == GeneratorShape::PiecewiseLinear;
  rep.lhs = restricted_fgan(PX, PG, f, lambda, space).value;
  const PushforwardMap id = PushforwardMap::identity(N);
  rep.rows.resize(ns.size() * trials);
  parallel_for(rep.rows.size(), [&](std::size_t idx) {
    const std::size_t ni = idx / trials, t = idx % trials;
    Rng rng(trial_seed(seed, ni, t));
    const DiscreteDistribution hx = DiscreteDistribution::normalized(lift(rx.empirical(ns[ni], rng), map_x));
    double decay = wasserstein_primal(PX, hx, C).value;
    DiscreteDistribution hg = PG;
    if (rep.two_sided) {
      hg = DiscreteDistribution::normalized(lift(rg.empirical(ns[ni], rng), map_g));
      decay += wasserstein_primal(PG, hg, C).value;
    }
    const double rhs = fwae_objective(hx, hg, id, space, f, lambda).value;
    rep.rows[idx] = {ns[ni], t, rep.lhs, rhs, rhs - rep.lhs, decay};
  });

  rep.pass = true;
  for (const auto& r : rep.rows) {
    if (!std::isfinite(r.rhs)) rep.rhs_finite = false;
    if (!(r.slack >= -r.decay - 1e-9)) rep.pass = false;
  }
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    std::vector<double> neg;
    for (std::size_t t = 0; t < trials; ++t) neg.push_back(std::max(0.0, -rep.rows[ni * trials + t].slack));
    rep.median_negative_slack.push_back(median(neg));
    if (ni > 0 && rep.median_negative_slack[ni] > rep.median_negative_slack[ni - 1] + 1e-12)
      ++rep.inversions;
  }
  if (rep.inversions > 1 || !rep.rhs_finite) rep.pass = false;
  return rep;
}

}  // namespace dualgap
