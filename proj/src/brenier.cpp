#include "dualgap/brenier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualgap/errors.hpp"
#include "dualgap/parallel.hpp"
#include "dualgap/random.hpp"

namespace dualgap {

namespace {

constexpr std::size_t kChunk = 4096;

std::size_t chunks(std::size_t n) { return (n + kChunk - 1) / kChunk; }

}  // namespace

void SemiDiscreteProblem::validate() const {
  if (atoms.rows() == 0 || atoms.cols() == 0) throw InputError("need at least one atom");
  if (nu.size() != atoms.rows()) throw InputError("one weight per atom is required");
  if (!atoms.allFinite()) throw InputError("atoms must be finite");
  DiscreteDistribution{nu};
  for (Eigen::Index i = 0; i < atoms.rows(); ++i)
    for (Eigen::Index j = i + 1; j < atoms.rows(); ++j)
      if (atoms.row(i) == atoms.row(j)) throw InputError("atoms must be distinct");
  if (lo.size() != atoms.cols() || hi.size() != atoms.cols())
    throw InputError("box dimension does not match the atoms");
  for (Eigen::Index k = 0; k < lo.size(); ++k)
    if (!(lo[k] < hi[k]) || !std::isfinite(lo[k]) || !std::isfinite(hi[k]))
      throw InputError("box must be bounded with lo < hi");
  if (sampler == Sampler::UniformGrid && grid_points < 2)
    throw InputError("grid sampler needs at least two points per axis");
}

Matrix SemiDiscreteProblem::sample(std::size_t n, std::uint64_t seed) const {
  const std::size_t d = dim();
  Matrix pts(n, d);
  parallel_for(chunks(n), [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        if (sampler == Sampler::UniformBox) {
          pts(i, k) = rng.uniform(lo[k], hi[k]);
        } else {
          const double t = double(rng.index(grid_points)) / double(grid_points - 1);
          pts(i, k) = lo[k] + t * (hi[k] - lo[k]);
        }
      }
  });
  return pts;
}

double BrenierPotential::phi(const Matrix& atoms, const Vector& x) const {
  return (atoms * x + h).maxCoeff();
}

BrenierPotential BrenierPotential::normalized() const {
  return BrenierPotential{Vector(h.array() - h.minCoeff())};
}

std::size_t assign_cell(const BrenierPotential& h, const Matrix& atoms, const Vector& x) {
  if (h.h.size() != atoms.rows() || x.size() != atoms.cols())
    throw InputError("potential, atoms and point dimensions do not match");
  std::size_t best = 0;
  double bv = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < atoms.rows(); ++i) {
    const double v = atoms.row(i).dot(x) + h.h[i];
    if (v > bv) bv = v, best = i;
  }
  return best;
}

Vector cell_masses(const BrenierPotential& h, const Matrix& atoms, const Matrix& points) {
  const std::size_t n = points.rows(), m = atoms.rows();
  if (n == 0) throw InputError("need at least one sample");
  // Per-chunk counts, reduced in chunk order.
  std::vector<std::vector<std::size_t>> counts(chunks(n), std::vector<std::size_t>(m, 0));
  parallel_for(counts.size(), [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i)
      ++counts[c][assign_cell(h, atoms, points.row(i).transpose())];
  });
  Vector out = Vector::Zero(m);
  for (const auto& c : counts)
    for (std::size_t i = 0; i < m; ++i) out[i] += c[i];
  return out / double(n);
}

Vector cell_masses(const BrenierPotential& h, const SemiDiscreteProblem& prob,
                   std::size_t n_samples, std::uint64_t seed) {
  prob.validate();
  if (n_samples == 0) throw InputError("n_samples must be at least 1");
  return cell_masses(h, prob.atoms, prob.sample(n_samples, seed));
}

double dual_objective(const BrenierPotential& h, const SemiDiscreteProblem& prob,
                      const Matrix& points) {
  double s = 0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) s += h.phi(prob.atoms, points.row(i).transpose());
  return prob.nu.dot(h.h) - s / points.rows();
}

FitResult fit_potential(const SemiDiscreteProblem& prob, const FitConfig& cfg) {
  prob.validate();
  if (cfg.n_samples == 0 || cfg.max_iters == 0 || !(cfg.step > 0) || !(cfg.tol > 0))
    throw InputError("fit configuration values must be positive");
  const Matrix pts = prob.sample(cfg.n_samples, cfg.seed);
  FitResult r;
  BrenierPotential h{Vector::Zero(prob.size())};
  Vector grad = prob.nu - cell_masses(h, prob.atoms, pts);
  double F = dual_objective(h, prob, pts);
  double res = grad.cwiseAbs().maxCoeff();
  r.residual_history.push_back(res);
  double step = cfg.step;
  std::size_t it = 0;
  for (; it < cfg.max_iters && res > cfg.tol; ++it) {
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      const BrenierPotential trial{h.h + step * grad};
      const double Ft = dual_objective(trial, prob, pts);
      const Vector gt = prob.nu - cell_masses(trial, prob.atoms, pts);
      const double rt = gt.cwiseAbs().maxCoeff();
      if (Ft >= F && rt <= res) {
        h = trial, F = Ft, grad = gt, res = rt;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    r.residual_history.push_back(res);
    step = std::min(cfg.step, step * 2);
  }
  r.iters = it;
  r.h = h.normalized();
  r.residual = res;
  r.converged = res <= cfg.tol;
  return r;
}

PushforwardCheck pushforward_check(const BrenierPotential& h, const SemiDiscreteProblem& prob,
                                   const Vector& nu, std::size_t n_samples, std::uint64_t seed,
                                   double tol) {
  if (nu.size() != prob.atoms.rows()) throw InputError("target weights do not match the atoms");
  const Vector m = cell_masses(h, prob, n_samples, seed);
  PushforwardCheck c;
  c.tv_error = 0.5 * (m - nu).cwiseAbs().sum();
  c.pass = c.tv_error <= tol;
  return c;
}

}  // namespace dualgap
