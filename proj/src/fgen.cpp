#include "dualgap/fgen.hpp"

#include <algorithm>
#include <cmath>

#include "dualgap/errors.hpp"

namespace dualgap {

struct FGenerator::Impl {
  std::string name;
  GeneratorShape shape;
  bool smooth_at_one;
  double upper;
  bool upper_closed;

  virtual ~Impl() = default;
  // All members take t ≥ 0 (t = 0 means the limit from the right).
  virtual double f(double t) const = 0;
  virtual double df(double t) const = 0;
  virtual double d2f(double t) const = 0;
  virtual double rec() const = 0;
  // Only called for y inside the domain.
  virtual double conj(double y) const = 0;
  virtual double dconj(double y) const = 0;
  virtual double d2conj(double y) const = 0;

  Impl(std::string n, GeneratorShape s, bool smooth, double up, bool closed)
      : name(std::move(n)), shape(s), smooth_at_one(smooth), upper(up), upper_closed(closed) {}
};

namespace {

const double kLn2 = std::log(2.0);

struct TotalVariation final : FGenerator::Impl {
  TotalVariation() : Impl("tv", GeneratorShape::PiecewiseLinear, false, 1.0, true) {}
  double f(double t) const override { return std::abs(t - 1); }
  double df(double t) const override { return t < 1 ? -1.0 : 1.0; }
  double d2f(double) const override { return 0; }
  double rec() const override { return 1; }
  double conj(double y) const override { return std::max(y, -1.0); }
  double dconj(double y) const override { return y < -1 ? 0.0 : 1.0; }
  double d2conj(double) const override { return 0; }
};

struct KullbackLeibler final : FGenerator::Impl {
  KullbackLeibler() : Impl("kl", GeneratorShape::Smooth, true, kInf, false) {}
  double f(double t) const override { return t == 0 ? 0.0 : t * std::log(t); }
  double df(double t) const override { return t == 0 ? -kInf : std::log(t) + 1; }
  double d2f(double t) const override { return 1 / t; }
  double rec() const override { return kInf; }
  double conj(double y) const override { return std::exp(y - 1); }
  double dconj(double y) const override { return std::exp(y - 1); }
  double d2conj(double y) const override { return std::exp(y - 1); }
};

struct ReverseKL final : FGenerator::Impl {
  ReverseKL() : Impl("reverse-kl", GeneratorShape::Smooth, true, 0.0, false) {}
  double f(double t) const override { return t == 0 ? kInf : -std::log(t); }
  double df(double t) const override { return t == 0 ? -kInf : -1 / t; }
  double d2f(double t) const override { return 1 / (t * t); }
  double rec() const override { return 0; }
  double conj(double y) const override { return -1 - std::log(-y); }
  double dconj(double y) const override { return -1 / y; }
  double d2conj(double y) const override { return 1 / (y * y); }
};

struct ChiSquared final : FGenerator::Impl {
  ChiSquared() : Impl("chi2", GeneratorShape::Smooth, true, kInf, false) {}
  double f(double t) const override { return (t - 1) * (t - 1); }
  double df(double t) const override { return 2 * (t - 1); }
  double d2f(double) const override { return 2; }
  double rec() const override { return kInf; }
  // Below −2 the maximizer is pinned at x = 0.
  double conj(double y) const override { return y >= -2 ? y + y * y / 4 : -1.0; }
  double dconj(double y) const override { return y >= -2 ? 1 + y / 2 : 0.0; }
  double d2conj(double y) const override { return y >= -2 ? 0.5 : 0.0; }
};

// f(t) = ½[t ln t − (t+1) ln((t+1)/2)], so D_f is the Jensen–Shannon divergence.
struct JensenShannon final : FGenerator::Impl {
  JensenShannon() : Impl("js", GeneratorShape::Smooth, true, 0.5 * kLn2, false) {}
  double f(double t) const override {
    const double a = t == 0 ? 0.0 : t * std::log(t);
    return 0.5 * (a - (t + 1) * std::log((t + 1) / 2));
  }
  double df(double t) const override {
    return t == 0 ? -kInf : 0.5 * std::log(2 * t / (t + 1));
  }
  double d2f(double t) const override { return 1 / (2 * t * (t + 1)); }
  double rec() const override { return 0.5 * kLn2; }
  double conj(double y) const override { return -0.5 * std::log(2 - std::exp(2 * y)); }
  double dconj(double y) const override {
    const double e = std::exp(2 * y);
    return e / (2 - e);
  }
  double d2conj(double y) const override {
    const double e = std::exp(2 * y);
    return 4 * e / ((2 - e) * (2 - e));
  }
};

// f(t) = t ln t − (t+1) ln(t+1) + 2 ln 2.
struct GanGenerator final : FGenerator::Impl {
  GanGenerator() : Impl("gan", GeneratorShape::Smooth, true, 0.0, false) {}
  double f(double t) const override {
    const double a = t == 0 ? 0.0 : t * std::log(t);
    return a - (t + 1) * std::log1p(t) + 2 * kLn2;
  }
  double df(double t) const override { return t == 0 ? -kInf : std::log(t / (t + 1)); }
  double d2f(double t) const override { return 1 / (t * (t + 1)); }
  double rec() const override { return 0; }
  double conj(double y) const override { return -std::log(-std::expm1(y)) - 2 * kLn2; }
  double dconj(double y) const override { return 1 / std::expm1(-y); }
  double d2conj(double y) const override {
    const double d = -std::expm1(y);
    return std::exp(y) / (d * d);
  }
};

struct IndicatorGenerator final : FGenerator::Impl {
  IndicatorGenerator() : Impl("indicator", GeneratorShape::Indicator, false, kInf, false) {}
  double f(double t) const override { return t == 1 ? 0.0 : kInf; }
  double df(double t) const override { return t < 1 ? -kInf : (t == 1 ? 0.0 : kInf); }
  double d2f(double) const override { return 0; }
  double rec() const override { return kInf; }
  double conj(double y) const override { return y; }
  double dconj(double) const override { return 1; }
  double d2conj(double) const override { return 0; }
};

double term_value(const GeneratorTerm& t, double x) {
  using K = GeneratorTerm::Kind;
  switch (t.kind) {
    case K::Power:
      if (t.param == 0) return t.coef;
      if (x == 0) {
        if (t.param > 0) return 0;
        return t.coef > 0 ? kInf : (t.coef < 0 ? -kInf : 0);
      }
      return t.coef * std::pow(x, t.param);
    case K::XLogX:
      return x == 0 ? 0.0 : t.coef * x * std::log(x);
    case K::Log:
      if (x == 0) return t.coef < 0 ? kInf : (t.coef > 0 ? -kInf : 0);
      return t.coef * std::log(x);
    case K::Abs:
      return t.coef * std::abs(x - t.param);
  }
  return 0;
}

double term_deriv(const GeneratorTerm& t, double x) {
  using K = GeneratorTerm::Kind;
  switch (t.kind) {
    case K::Power:
      if (t.param == 0) return 0;
      if (x == 0) {
        if (t.param > 1) return 0;
        if (t.param == 1) return t.coef;
        return t.coef > 0 ? -kInf : kInf;
      }
      return t.coef * t.param * std::pow(x, t.param - 1);
    case K::XLogX:
      return x == 0 ? (t.coef > 0 ? -kInf : kInf) : t.coef * (std::log(x) + 1);
    case K::Log:
      return x == 0 ? (t.coef < 0 ? -kInf : kInf) : t.coef / x;
    case K::Abs:
      return t.coef * (x < t.param ? -1.0 : 1.0);
  }
  return 0;
}

double term_deriv2(const GeneratorTerm& t, double x) {
  using K = GeneratorTerm::Kind;
  switch (t.kind) {
    case K::Power:
      if (t.param == 0 || t.param == 1) return 0;
      return t.coef * t.param * (t.param - 1) * std::pow(x, t.param - 2);
    case K::XLogX:
      return t.coef / x;
    case K::Log:
      return -t.coef / (x * x);
    case K::Abs:
      return 0;
  }
  return 0;
}

double term_recession(const GeneratorTerm& t) {
  using K = GeneratorTerm::Kind;
  switch (t.kind) {
    case K::Power:
      if (t.param > 1) return t.coef > 0 ? kInf : (t.coef < 0 ? -kInf : 0);
      if (t.param == 1) return t.coef;
      return 0;
    case K::XLogX:
      return t.coef > 0 ? kInf : (t.coef < 0 ? -kInf : 0);
    case K::Log:
      return 0;
    case K::Abs:
      return t.coef;
  }
  return 0;
}

struct CustomGenerator final : FGenerator::Impl {
  std::vector<GeneratorTerm> terms;
  double offset = 0;
  double recession = 0;

  CustomGenerator(std::string n, std::vector<GeneratorTerm> ts, bool has_abs)
      : Impl(std::move(n), has_abs ? GeneratorShape::General : GeneratorShape::Smooth, true,
             kInf, false),
        terms(std::move(ts)) {
    offset = raw(1.0);
    if (!std::isfinite(offset)) throw InputError("custom generator must be finite at 1");
    for (const auto& t : terms) recession += term_recession(t);
    upper = recession;
    // Closed upper end when f(x) − rec·x stays bounded, i.e. f* finite there.
    // Checked numerically: the gap must settle as x grows.
    if (std::isfinite(recession)) {
      const double g1 = f(1e6) - recession * 1e6;
      const double g2 = f(1e8) - recession * 1e8;
      upper_closed = std::abs(g2 - g1) < 1e-6 * (1 + std::abs(g1));
    }
    for (const auto& t : terms)
      if (t.kind == GeneratorTerm::Kind::Abs && std::abs(t.param - 1) < 1e-15) smooth_at_one = false;
  }

  double raw(double x) const {
    double s = 0;
    for (const auto& t : terms) s += term_value(t, x);
    return s;
  }
  double f(double t) const override { return raw(t) - offset; }
  double df(double x) const override {
    double s = 0;
    for (const auto& t : terms) s += term_deriv(t, x);
    return s;
  }
  double d2f(double x) const override {
    double s = 0;
    for (const auto& t : terms) s += term_deriv2(t, x);
    return s;
  }
  double rec() const override { return recession; }

  // The maximizer of x·y − f(x): the point where the nondecreasing right
  // derivative crosses y, found by bracketing and bisection.
  double argmax(double y) const {
    if (df(0) >= y) return 0;
    double hi = 1;
    while (df(hi) < y) {
      hi *= 2;
      if (hi > 1e15) return hi;
    }
    double lo = hi > 1 ? hi / 2 : 0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (df(mid) < y ? lo : hi) = mid;
    }
    // A kink can make either end the maximizer.
    return (lo * y - f(lo) > hi * y - f(hi)) ? lo : hi;
  }
  double conj(double y) const override {
    const double x = argmax(y);
    return x * y - f(x);
  }
  double dconj(double y) const override { return argmax(y); }
  double d2conj(double y) const override {
    const double c = d2f(argmax(y));
    return c > 0 ? 1 / c : 0;
  }
};

double midpoint_gap(const FGenerator::Impl& g) {
  // 200-point grid on (0, 10]; returns the worst violation of midpoint convexity.
  double worst = -kInf;
  for (int i = 1; i <= 200; ++i)
    for (int j = i + 1; j <= 200; ++j) {
      const double a = 0.05 * i, b = 0.05 * j;
      const double fa = g.f(a), fb = g.f(b);
      if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
      worst = std::max(worst, g.f(0.5 * (a + b)) - 0.5 * (fa + fb));
    }
  return worst;
}

}  // namespace

FGenerator FGenerator::builtin(const std::string& name) {
  std::shared_ptr<const Impl> impl;
  if (name == "tv") impl = std::make_shared<TotalVariation>();
  else if (name == "kl") impl = std::make_shared<KullbackLeibler>();
  else if (name == "reverse-kl") impl = std::make_shared<ReverseKL>();
  else if (name == "chi2" || name == "chi-squared") impl = std::make_shared<ChiSquared>();
  else if (name == "js") impl = std::make_shared<JensenShannon>();
  else if (name == "gan") impl = std::make_shared<GanGenerator>();
  else if (name == "indicator") impl = std::make_shared<IndicatorGenerator>();
  else throw InputError("unknown generator: " + name);
  return FGenerator(std::move(impl), 1.0);
}

std::vector<std::string> FGenerator::builtin_names() {
  return {"tv", "kl", "reverse-kl", "chi2", "js", "gan", "indicator"};
}

FGenerator FGenerator::custom(const std::string& name, std::vector<GeneratorTerm> terms) {
  if (terms.empty()) throw InputError("custom generator needs at least one term");
  bool has_abs = false;
  for (const auto& t : terms) {
    if (!std::isfinite(t.coef) || !std::isfinite(t.param))
      throw InputError("custom generator term is not finite");
    if (t.kind == GeneratorTerm::Kind::Abs) has_abs = true;
  }
  auto impl = std::make_shared<CustomGenerator>(name, std::move(terms), has_abs);
  if (midpoint_gap(*impl) > 1e-12) throw InputError("custom generator " + name + " is not convex");
  return FGenerator(std::move(impl), 1.0);
}

const std::string& FGenerator::name() const { return impl_->name; }
GeneratorShape FGenerator::shape() const { return impl_->shape; }

FGenerator FGenerator::scaled(double lambda) const {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw InputError("scale must be positive");
  return FGenerator(impl_, scale_ * lambda);
}

FGenerator FGenerator::unscaled() const { return FGenerator(impl_, 1.0); }

double FGenerator::eval(double t) const {
  if (t < 0 || std::isnan(t)) return kInf;
  if (std::isinf(t)) return kInf;
  return scale_ * impl_->f(t);
}

double FGenerator::deriv(double t) const {
  if (t < 0) return -kInf;
  if (std::isinf(t)) return recession();
  return scale_ * impl_->df(t);
}

double FGenerator::deriv2(double t) const { return scale_ * impl_->d2f(t); }
double FGenerator::recession() const { return scale_ * impl_->rec(); }
bool FGenerator::differentiable_at_one() const { return impl_->smooth_at_one; }

double FGenerator::conjugate_upper() const { return scale_ * impl_->upper; }
bool FGenerator::conjugate_upper_closed() const { return impl_->upper_closed; }

bool FGenerator::in_conjugate_domain(double y) const {
  const double u = conjugate_upper();
  return y < u || (y == u && impl_->upper_closed);
}

double FGenerator::conjugate(double y) const {
  if (std::isnan(y)) return kInf;
  // The indicator's conjugate is the identity at every scale; written in the
  // scaled form so that (λf)*(y) and λ·f*(y/λ) round identically.
  if (impl_->shape == GeneratorShape::Indicator) return scale_ * (y / scale_);
  const double s = y / scale_;
  if (!(s < impl_->upper || (s == impl_->upper && impl_->upper_closed))) return kInf;
  return scale_ * impl_->conj(s);
}

double FGenerator::conjugate_deriv(double y) const {
  if (impl_->shape == GeneratorShape::Indicator) return 1;
  return impl_->dconj(y / scale_);
}

double FGenerator::conjugate_deriv2(double y) const {
  if (impl_->shape == GeneratorShape::Indicator) return 0;
  return impl_->d2conj(y / scale_) / scale_;
}

double conjugate_numeric(const FGenerator& f, double y, double x_max, double resolution) {
  if (!(x_max > 0) || !(resolution > 0)) throw InputError("x_max and resolution must be positive");
  auto g = [&](double x) {
    const double v = f.eval(x);
    return std::isfinite(v) ? x * y - v : -kInf;
  };
  const long steps = static_cast<long>(std::floor(x_max / resolution));
  double best = -kInf, best_x = 0;
  auto consider = [&](double x) {
    const double v = g(x);
    if (v > best) best = v, best_x = x;
  };
  for (long k = 0; k <= steps; ++k) consider(k * resolution);
  consider(x_max);
  if (x_max >= 1) consider(1.0);  // f(1) = 0 is always attained
  // Golden-section search on the concave objective around the best grid point.
  double a = std::max(0.0, best_x - resolution), b = std::min(x_max, best_x + resolution);
  const double phi = 0.5 * (std::sqrt(5.0) - 1);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (gc >= gd) {
      b = d, d = c, gd = gc;
      c = b - phi * (b - a), gc = g(c);
    } else {
      a = c, c = d, gc = gd;
      d = a + phi * (b - a), gd = g(d);
    }
    best = std::max({best, gc, gd});
  }
  return best;
}

double scale_conjugate(const FGenerator& f, double lambda, double y) {
  if (!(lambda > 0)) throw InputError("scale_conjugate requires lambda > 0");
  return f.scaled(lambda).conjugate(y);
}

double f_divergence(const Vector& p, const Vector& q, const FGenerator& f) {
  if (p.size() != q.size()) throw InputError("f_divergence: universes differ");
  if (f.shape() == GeneratorShape::Indicator) {
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (std::abs(p[i] - q[i]) > 1e-12) return kInf;
    return 0;
  }
  // Accumulate with the unit-scale generator, then multiply once, so that
  // D_{λf} = λ·D_f holds bit for bit.
  const FGenerator base = f.unscaled();
  const double rec = base.recession();
  double s = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (q[i] > 0) {
      s += q[i] * base.eval(p[i] / q[i]);
    } else if (p[i] > 0) {
      s += p[i] * rec;
    }
  }
  return f.scale() * s;
}

double f_divergence(const DiscreteDistribution& P, const DiscreteDistribution& Q,
                    const FGenerator& f) {
  return f_divergence(P.weights(), Q.weights(), f);
}

}  // namespace dualgap
