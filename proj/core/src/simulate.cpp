#include "levypot/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "levypot/errors.hpp"
#include "levypot/quadrature.hpp"

namespace levypot::simulate {

namespace {

constexpr double kPi = std::numbers::pi;

void check_stable_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ParameterError("stable index alpha must lie in (0, 2)");
}

void require_inside(const Domain& D, const Point& x, const char* what) {
  require_same_dim(x, D.dim(), what);
  if (!D.contains(x)) throw DomainError(std::string(what) + ": start point " + to_string(x) + " is not in the domain");
}

}  // namespace

StableProcess::StableProcess(int d, double alpha) : d_(d), alpha_(alpha) {
  check_stable_alpha(alpha);
  if (d < 1 || d > kMaxDim) throw ParameterError("dimension out of range");
  c_time_ = kernels::stable_exit_time_constant(d, alpha);
  c_jump_ = kernels::stable_jump_constant(d, alpha);
  c_poisson_ = kernels::stable_poisson_constant(d, alpha);
  c_green_ = d > alpha ? kernels::stable_green_constant(d, alpha) : 0.0;
}

StableProcess StableProcess::from_model(const ProcessModel& model) {
  if (!model.is_stable())
    throw UnsupportedModelError("exact sphere-walk sampling needs an isotropic stable model, got '" + model.id() + "'");
  return StableProcess(model.dim(), model.alpha());
}

double StableProcess::green(double r) const {
  if (!transient()) throw UnsupportedModelError("free Green function needs d > alpha");
  if (!(r > 0.0)) throw SingularityError("free Green function is singular at r = 0");
  return c_green_ * std::pow(r, alpha_ - d_);
}

double StableProcess::centered_poisson(const Point& center, double radius, const Point& z) const {
  const double s2 = (z - center).norm2();
  const double r2 = radius * radius;
  if (s2 <= r2) return 0.0;
  return c_poisson_ * std::pow(radius, alpha_) * std::pow(s2 - r2, -0.5 * alpha_) * std::pow(s2, -0.5 * d_);
}

double StableProcess::poisson(const Point& center, double radius, const Point& x, const Point& z) const {
  const double rx2 = (x - center).norm2();
  const double rz2 = (z - center).norm2();
  const double r2 = radius * radius;
  if (rx2 >= r2 || rz2 <= r2) return 0.0;
  return c_poisson_ * std::pow((r2 - rx2) / (rz2 - r2), 0.5 * alpha_) * std::pow((x - z).norm2(), -0.5 * d_);
}

double centered_exit_radius(double alpha, RngStream& rng) {
  const double ga = rng.gamma(1.0 - 0.5 * alpha);
  const double gb = rng.gamma(0.5 * alpha);
  return std::sqrt(1.0 + ga / gb);
}

Point ball_exit_sample(double alpha, int d, const Point& x_rel, RngStream& rng) {
  check_stable_alpha(alpha);
  require_same_dim(x_rel, d, "ball_exit_sample");
  if (!(x_rel.norm() < 1.0)) throw ParameterError("ball_exit_sample needs |x_rel| < 1");
  Point cur = x_rel;
  for (double n = cur.norm(); n < 1.0; n = cur.norm()) {
    const double rho = 1.0 - n;
    cur += rng.direction(d) * (rho * centered_exit_radius(alpha, rng));
  }
  return cur;
}

Point occupation_sample(double alpha, int d, RngStream& rng) {
  check_stable_alpha(alpha);
  if (!(d > alpha)) throw UnsupportedModelError("occupation sampling needs d > alpha");
  const double t = rng.beta(0.5 * alpha, 0.5 * d);
  const double r = std::sqrt(1.0 - t) * std::pow(rng.uniform(), 1.0 / alpha);
  return rng.direction(d) * r;
}

ExitSample walk_exit(const ProcessModel& model, const Domain& D, const Point& x, RngStream& rng,
                     std::uint64_t budget) {
  const StableProcess proc = StableProcess::from_model(model);
  require_inside(D, x, "walk_exit");
  WalkLimits lim;
  lim.max_steps = budget;
  return walk(proc, D, x, rng, lim);
}

LadderVerdict classify_ladder(const std::vector<double>& values, double growth, double converge) {
  if (values.size() < 2) return LadderVerdict::Undetermined;
  bool all_grow = true;
  std::vector<double> inc;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double prev = values[k - 1];
    const double rel = prev > 0.0 ? (values[k] - prev) / prev : (values[k] > 0.0 ? 1.0 : 0.0);
    if (!(rel >= growth)) all_grow = false;
    inc.push_back(values[k] > 0.0 ? std::abs(values[k] - prev) / values[k] : 0.0);
  }
  if (all_grow) return LadderVerdict::Divergent;
  if (inc.size() >= 3 && std::all_of(inc.end() - 3, inc.end(), [&](double v) { return v < converge; }))
    return LadderVerdict::Convergent;
  return LadderVerdict::Undetermined;
}

const char* to_string(LadderVerdict v) {
  switch (v) {
    case LadderVerdict::Convergent:
      return "convergent";
    case LadderVerdict::Divergent:
      return "divergent";
    case LadderVerdict::Undetermined:
      return "undetermined";
  }
  return "undetermined";
}

MeanExitResult mean_exit_time(const ProcessModel& model, const Domain& D, const Point& x, const RunOptions& opt,
                              const LadderOptions& ladder) {
  const StableProcess proc = StableProcess::from_model(model);
  require_inside(D, x, "mean_exit_time");
  if (ladder.doublings < 0) throw ParameterError("ladder doublings must be nonnegative");
  MeanExitResult res;
  const double t0 = ladder.t0 > 0.0 ? ladder.t0 : 100.0 * proc.ball_exit_time(D.interior_radius(x));
  const int rungs = ladder.doublings + 1;
  for (int k = 0; k < rungs; ++k) res.caps.push_back(t0 * std::ldexp(1.0, k));
  WalkLimits lim;
  lim.max_steps = opt.budget;
  lim.time_cap = res.caps.back();
  const std::size_t width = static_cast<std::size_t>(rungs) + 3;
  auto acc = run_samples(opt.plan(), width, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    const ExitSample s = walk(proc, D, x, rng, lim);
    for (int k = 0; k < rungs; ++k) out[k] = std::min(s.time_weight, res.caps[k]);
    out[rungs] = s.truncated ? 1.0 : 0.0;
    out[rungs + 1] = s.time_capped ? 1.0 : 0.0;
    out[rungs + 2] = s.time_weight;
  });
  std::vector<double> values;
  for (int k = 0; k < rungs; ++k) {
    res.ladder.push_back(acc.estimate(k));
    values.push_back(acc.mean(k));
  }
  for (int k = 1; k < rungs; ++k)
    res.growth.push_back(values[k - 1] > 0.0 ? (values[k] - values[k - 1]) / values[k - 1] : 0.0);
  res.verdict = classify_ladder(values, ladder.growth, ladder.converge);
  res.truncated_fraction = acc.mean(rungs);
  res.capped_fraction = acc.mean(rungs + 1);
  res.estimate = res.ladder.back();
  res.estimate.diverged = res.verdict == LadderVerdict::Divergent;
  return res;
}

Estimate mean_exit_time_plain(const StableProcess& proc, const Domain& D, const Point& x, const RunOptions& opt) {
  require_inside(D, x, "mean_exit_time");
  WalkLimits lim;
  lim.max_steps = opt.budget;
  auto acc = run_samples(opt.plan(), 1, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    out[0] = walk(proc, D, x, rng, lim).time_weight;
  });
  return acc.estimate(0);
}

Estimate green_function(const ProcessModel& model, const Domain& D, const Point& x, const Point& y,
                        const RunOptions& opt) {
  const StableProcess proc = StableProcess::from_model(model);
  if (!proc.transient()) throw UnsupportedModelError("green_function needs a transient model (d > alpha)");
  require_inside(D, x, "green_function");
  require_inside(D, y, "green_function");
  if (x == y) throw SingularityError("green_function is singular at x = y");
  const double g0 = proc.green(distance(x, y));
  WalkLimits lim;
  lim.max_steps = opt.budget;
  auto acc = run_samples(opt.plan(), 1, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    const ExitSample s = walk(proc, D, x, rng, lim);
    out[0] = s.truncated ? g0 : g0 - proc.green(distance(s.exit_point, y));
  });
  return acc.estimate(0);
}

HarmonicResult harmonic_eval(const ProcessModel& model, const Domain& D, const BoundaryData& f, const Point& x,
                             const RunOptions& opt) {
  const StableProcess proc = StableProcess::from_model(model);
  require_inside(D, x, "harmonic_eval");
  WalkLimits lim;
  lim.max_steps = opt.budget;
  auto acc = run_samples(opt.plan(), 2, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    const ExitSample s = walk(proc, D, x, rng, lim);
    if (s.truncated) {
      out[1] = 1.0;
      return;
    }
    out[0] = f(s.exit_point);
  });
  HarmonicResult res;
  res.estimate = acc.estimate(0);
  res.truncated = static_cast<std::uint64_t>(std::llround(acc.mean(1) * static_cast<double>(acc.count())));
  res.warning = acc.mean(1) > 1e-3;
  return res;
}

double TargetQuadrature::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

TargetQuadrature target_quadrature(const Domain& A, const TargetQuadratureOptions& opt) {
  TargetQuadrature q;
  const int d = A.dim();
  if (auto shell = A.as_shell()) {
    if (!(shell->r_out > shell->r_in)) return q;
    const auto dirs = kernels::direction_grid(d, d == 1 ? 2 : opt.angular);
    const double dw = kernels::sphere_area(d) / static_cast<double>(dirs.size());
    std::vector<double> radii, rw;
    if (std::isinf(shell->r_out)) {
      if (!(shell->r_in > 0.0)) throw GeometryError("target quadrature needs a bounded-below exterior radius");
      const double R = shell->r_in, a = opt.decay;
      const GaussRule g = gauss_legendre(opt.radial, 0.0, 1.0);
      for (int i = 0; i < opt.radial; ++i) {
        const double t = g.nodes[i];
        const double r = R * std::pow(t, -1.0 / a);
        radii.push_back(r);
        rw.push_back(g.weights[i] * (R / a) * std::pow(t, -1.0 / a - 1.0) * std::pow(r, d - 1));
      }
    } else {
      const GaussRule g = gauss_legendre(opt.radial, shell->r_in, shell->r_out);
      for (int i = 0; i < opt.radial; ++i) {
        radii.push_back(g.nodes[i]);
        rw.push_back(g.weights[i] * std::pow(g.nodes[i], d - 1));
      }
    }
    for (std::size_t i = 0; i < radii.size(); ++i)
      for (const Point& th : dirs) {
        q.nodes.push_back(shell->center + th * radii[i]);
        q.weights.push_back(rw[i] * dw);
      }
    return q;
  }
  const auto box = A.bounding_box();
  if (!box) throw GeometryError("target quadrature needs a bounded target set, got " + A.to_string());
  const auto& [lo, hi] = *box;
  const int m = std::max(opt.grid, 1);
  double cell = 1.0;
  for (int i = 0; i < d; ++i) cell *= (hi[i] - lo[i]) / m;
  std::vector<int> idx(d, 0);
  for (;;) {
    Point z(d);
    for (int i = 0; i < d; ++i) z[i] = lo[i] + (idx[i] + 0.5) * (hi[i] - lo[i]) / m;
    if (A.contains(z)) {
      q.nodes.push_back(z);
      q.weights.push_back(cell);
    }
    int k = 0;
    while (k < d && ++idx[k] == m) idx[k++] = 0;
    if (k == d) break;
  }
  return q;
}

double target_step_mass(const StableProcess& proc, const TargetQuadrature& q, const Point& center, double radius) {
  const int d = proc.dim();
  const double alpha = proc.alpha();
  const double r2 = radius * radius;
  const bool cauchy = alpha == 1.0;
  const int half = d / 2;
  const bool odd = d % 2 == 1;
  double s = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j) {
    const Point& z = q.nodes[j];
    double s2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double t = z[i] - center[i];
      s2 += t * t;
    }
    if (s2 <= r2) continue;
    const double gap = cauchy ? 1.0 / std::sqrt(s2 - r2) : std::pow(s2 - r2, -0.5 * alpha);
    double far = 1.0;
    for (int k = 0; k < half; ++k) far *= s2;
    if (odd) far *= std::sqrt(s2);
    s += q.weights[j] * gap / far;
  }
  return proc.poisson_constant() * std::pow(radius, alpha) * s;
}

LevySystemReport levy_system_check(const ProcessModel& model, const Domain& D, const Point& x, const Domain& A,
                                   const RunOptions& opt, const TargetQuadratureOptions& qopt) {
  const StableProcess proc = StableProcess::from_model(model);
  require_inside(D, x, "levy_system_check");
  if (A.dim() != D.dim()) throw ParameterError("levy_system_check: target dimension mismatch");
  TargetQuadratureOptions qo = qopt;
  qo.decay = proc.alpha();
  const TargetQuadrature q = target_quadrature(A, qo);
  for (const Point& z : q.nodes)
    if (D.contains(z) || !(D.clearance(z) > 0.0))
      throw DomainError("levy_system_check: target set must be disjoint from the closure of the domain");
  WalkLimits lim;
  lim.max_steps = opt.budget;
  auto acc = run_samples(opt.plan(), 3, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    double mass = 0.0;
    const ExitSample s = walk(proc, D, x, rng, lim, [&](const Point& c, double rho) {
      mass += target_step_mass(proc, q, c, rho);
    });
    out[0] = !s.truncated && A.contains(s.exit_point) ? 1.0 : 0.0;
    out[1] = mass;
    out[2] = s.truncated ? 1.0 : 0.0;
  });
  LevySystemReport rep;
  rep.direct = acc.estimate(0);
  rep.levy = acc.estimate(1);
  rep.difference = acc.difference(0, 1);
  rep.z = rep.difference.std_error > 0.0 ? rep.difference.value / rep.difference.std_error : 0.0;
  rep.truncated = static_cast<std::uint64_t>(std::llround(acc.mean(2) * static_cast<double>(acc.count())));
  return rep;
}

double positive_stable(double beta, RngStream& rng) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("positive stable index must lie in (0, 1)");
  const double u = kPi * rng.uniform();
  const double e = rng.exponential();
  const double a = std::pow(std::pow(std::sin(beta * u), beta) * std::pow(std::sin((1.0 - beta) * u), 1.0 - beta) /
                                std::sin(u),
                            1.0 / (1.0 - beta));
  return std::pow(a / e, (1.0 - beta) / beta);
}

SubordinatorIncrement::SubordinatorIncrement(const ProcessModel& model) {
  if (!model.isotropic()) throw UnsupportedModelError("subordinated walk needs an isotropic model");
  if (model.is_stable()) {
    family_ = bernstein::Family::Stable;
    beta_ = 0.5 * model.alpha();
    step_exponent_ = model.alpha();
    return;
  }
  const auto* f = model.subordinator();
  if (!f) throw UnsupportedModelError("model '" + model.id() + "' has no subordinator");
  family_ = f->family();
  switch (family_) {
    case bernstein::Family::Stable:
      beta_ = f->index();
      step_exponent_ = 2.0 * beta_;
      break;
    case bernstein::Family::Gamma:
      break;
    case bernstein::Family::GeometricStable:
      beta_ = 0.5 * f->index();
      break;
    default:
      throw UnsupportedModelError("no exact increment sampler for subordinator '" + f->name() + "'");
  }
}

double SubordinatorIncrement::operator()(double h, RngStream& rng) const {
  switch (family_) {
    case bernstein::Family::Stable:
      return beta_ >= 1.0 ? h : std::pow(h, 1.0 / beta_) * positive_stable(beta_, rng);
    case bernstein::Family::Gamma:
      return rng.gamma(h);
    case bernstein::Family::GeometricStable: {
      const double g = rng.gamma(h);
      return beta_ >= 1.0 ? g : std::pow(g, 1.0 / beta_) * positive_stable(beta_, rng);
    }
    default:
      return 0.0;
  }
}

ExitSample subordinated_walk_exit(const ProcessModel& model, const Domain& D, const Point& x, RngStream& rng,
                                  const SubordinatedWalkOptions& opt) {
  require_inside(D, x, "subordinated_walk_exit");
  const SubordinatorIncrement inc(model);
  const int d = D.dim();
  ExitSample s;
  Point cur = x;
  while (D.contains(cur)) {
    if (s.steps >= opt.max_steps) {
      s.truncated = true;
      break;
    }
    const double c = std::max(D.clearance(cur), opt.min_clearance);
    const double h = opt.step_factor * std::pow(c, inc.step_exponent());
    const double scale = std::sqrt(2.0 * inc(h, rng));
    for (int i = 0; i < d; ++i) cur[i] += scale * rng.normal();
    s.time_weight += h;
    ++s.steps;
  }
  s.exit_point = cur;
  return s;
}

}  // namespace levypot::simulate
