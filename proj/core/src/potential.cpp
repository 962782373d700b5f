#include "levypot/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "levypot/errors.hpp"
#include "levypot/parallel.hpp"

namespace levypot::potential {

using simulate::ExitSample;
using simulate::StableProcess;
using simulate::TargetQuadrature;
using simulate::WalkLimits;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tag offsets that keep the sub-tasks of one operation on disjoint streams.
enum : std::uint64_t {
  kTagMain = 0,
  kTagAnchor = 1,
  kTagNumerator = 2,
  kTagDenominator = 3,
  kTagMass = 4,
  kTagControl = 5,
  kTagDirect = 6,
  kTagStage = 7,
  kTagProbeBase = 64,
};

std::uint64_t probe_tag(std::size_t k) { return kTagProbeBase + 8 * static_cast<std::uint64_t>(k); }

void require_inside(const Domain& D, const Point& x, const char* what) {
  require_same_dim(x, D.dim(), what);
  if (!D.contains(x)) throw DomainError(std::string(what) + ": point " + to_string(x) + " is not in the domain");
}

WalkLimits limits(const RunOptions& opt) {
  WalkLimits lim;
  lim.max_steps = opt.budget;
  return lim;
}

RunOptions with_tag(const RunOptions& opt, std::uint64_t offset) {
  RunOptions o = opt;
  o.tag = opt.tag * 1024 + offset;
  return o;
}

Point unit(const Point& v, const char* what) {
  const double n = v.norm();
  if (!(n > 0.0)) throw ParameterError(std::string(what) + ": direction must be nonzero");
  return v * (1.0 / n);
}

// Quadrature of a target set, checked to lie outside the closure of D.
TargetQuadrature target_for(const StableProcess& proc, const Domain& D, const Domain& target,
                            const simulate::TargetQuadratureOptions& qopt, const char* what) {
  if (target.dim() != D.dim()) throw ParameterError(std::string(what) + ": target dimension mismatch");
  simulate::TargetQuadratureOptions qo = qopt;
  qo.decay = proc.alpha();
  TargetQuadrature q = simulate::target_quadrature(target, qo);
  for (const Point& z : q.nodes)
    if (D.contains(z) || !(D.clearance(z) > 0.0))
      throw DomainError(std::string(what) + ": target " + target.to_string() +
                        " must be disjoint from the closure of " + D.to_string());
  return q;
}

// int_T j(z0, y) dy.
double weighted_target_mass(const StableProcess& proc, const TargetQuadrature& q, const Point& z0) {
  double s = 0.0;
  for (std::size_t j = 0; j < q.nodes.size(); ++j) s += q.weights[j] * proc.jump_density(distance(q.nodes[j], z0));
  return s;
}

// Per-walk Levy-system masses sum_k P_{B_k}(X_k, T_i) for several targets.
struct LevyWalk {
  ExitSample exit;
  std::vector<double> mass;
  double poisson_z0 = 0.0;
};

LevyWalk levy_walk(const StableProcess& proc, const Domain& D, const Point& x, RngStream& rng, const WalkLimits& lim,
                   const std::vector<const TargetQuadrature*>& targets, const Point* z0 = nullptr) {
  LevyWalk w;
  w.mass.assign(targets.size(), 0.0);
  w.exit = simulate::walk(proc, D, x, rng, lim, [&](const Point& c, double rho) {
    for (std::size_t i = 0; i < targets.size(); ++i) w.mass[i] += simulate::target_step_mass(proc, *targets[i], c, rho);
    if (z0) w.poisson_z0 += proc.centered_poisson(c, rho, *z0);
  });
  return w;
}

// Defensive mixture for exit points: with probability eta the next position is
// drawn uniformly from a box around the part of the region that carries most
// of a harmonic's mass, and the path weight absorbs the likelihood ratio.
struct Guide {
  Point lo, hi;
  double density = 0.0;
  double eta = 0.2;
  bool active = false;
};

double box_distance(const Guide& g, const Point& c) {
  double s = 0.0;
  for (int i = 0; i < c.dim(); ++i) {
    const double e = std::max({g.lo[i] - c[i], 0.0, c[i] - g.hi[i]});
    s += e * e;
  }
  return std::sqrt(s);
}

// Box around region points with r_in < |y - center| < r_out, from a grid scan.
Guide make_guide(const Domain& region, const Point& center, double r_in, double r_out) {
  const int d = region.dim();
  const int m = d == 2 ? 400 : (d == 3 ? 64 : 16);
  const double h = 2.0 * r_out / m;
  Guide g;
  g.lo = center;
  g.hi = center;
  bool any = false;
  std::vector<int> idx(d, 0);
  for (;;) {
    Point y = center;
    for (int i = 0; i < d; ++i) y[i] += -r_out + (idx[i] + 0.5) * h;
    const double dist = distance(y, center);
    if (dist > r_in && dist < r_out && region.contains(y)) {
      for (int i = 0; i < d; ++i) {
        g.lo[i] = any ? std::min(g.lo[i], y[i] - h) : y[i] - h;
        g.hi[i] = any ? std::max(g.hi[i], y[i] + h) : y[i] + h;
      }
      any = true;
    }
    int i = 0;
    while (i < d && ++idx[i] == m) idx[i++] = 0;
    if (i == d) break;
  }
  if (!any) return g;
  double vol = 1.0;
  for (int i = 0; i < d; ++i) vol *= g.hi[i] - g.lo[i];
  g.density = 1.0 / vol;
  g.active = true;
  return g;
}

// levy_walk with guided exit draws; masses carry the path weight.
LevyWalk guided_walk(const StableProcess& proc, const Domain& D, const Point& x, RngStream& rng, const WalkLimits& lim,
                     const std::vector<const TargetQuadrature*>& targets, const Guide& g) {
  LevyWalk w;
  w.mass.assign(targets.size(), 0.0);
  ExitSample& s = w.exit;
  Point cur = x;
  double weight = 1.0;
  const int d = proc.dim();
  while (D.contains(cur)) {
    if (s.steps >= lim.max_steps) {
      s.truncated = true;
      break;
    }
    if (s.time_weight >= lim.time_cap) {
      s.time_capped = true;
      break;
    }
    const double rho = D.interior_radius(cur);
    for (std::size_t i = 0; i < targets.size(); ++i)
      w.mass[i] += weight * simulate::target_step_mass(proc, *targets[i], cur, rho);
    s.time_weight += proc.ball_exit_time(rho);
    ++s.steps;
    if (!(g.active && box_distance(g, cur) >= 4.0 * rho)) {
      cur += rng.direction(d) * (rho * simulate::centered_exit_radius(proc.alpha(), rng));
      continue;
    }
    Point next = cur;
    if (rng.uniform() < g.eta) {
      for (int i = 0; i < d; ++i) next[i] = g.lo[i] + (g.hi[i] - g.lo[i]) * rng.uniform();
    } else {
      next += rng.direction(d) * (rho * simulate::centered_exit_radius(proc.alpha(), rng));
    }
    const double p = proc.centered_poisson(cur, rho, next);
    bool in_box = true;
    for (int i = 0; i < d; ++i) in_box = in_box && next[i] >= g.lo[i] && next[i] <= g.hi[i];
    const double q = (1.0 - g.eta) * p + (in_box ? g.eta * g.density : 0.0);
    if (!(p > 0.0)) break;
    weight *= p / q;
    cur = next;
  }
  s.exit_point = cur;
  return w;
}

// Stratified volume integral over `region`; fn(y, weight, rng, out) fills the
// per-sample outputs; `base` is added to every sample.
template <class Fn>
MomentAccumulator stratified(const Domain& region, std::uint64_t points, const RunOptions& opt,
                             const std::vector<double>& base, Fn&& fn) {
  if (!region.has_volume_sampler()) throw GeometryError("no volume sampler for " + region.to_string());
  if (points == 0) throw ParameterError("stratified integral needs at least one point");
  SamplingPlan plan{points, opt.seed, opt.tag, opt.workers, 1024};
  const double n = static_cast<double>(points);
  return run_samples(plan, base.size(), [&](RngStream& rng, std::uint64_t i, std::span<double> out) {
    const double u = (static_cast<double>(i) + rng.uniform()) / n;
    const geometry::VolumeSample s = region.sample_volume(u, rng);
    if (s.weight > 0.0) fn(s.y, s.weight, rng, out);
    for (std::size_t j = 0; j < base.size(); ++j) out[j] += base[j];
  });
}

// Sum of P_{B_k}(X_k, z) along walks from x.
Estimate poisson_sum(const StableProcess& proc, const Domain& D, const Point& x, const Point& z, const RunOptions& opt,
                     double* truncated = nullptr) {
  const WalkLimits lim = limits(opt);
  auto acc = run_samples(opt.plan(), 2, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    double s = 0.0;
    const ExitSample e = simulate::walk(proc, D, x, rng, lim, [&](const Point& c, double rho) {
      s += proc.centered_poisson(c, rho, z);
    });
    out[0] = s;
    out[1] = e.truncated ? 1.0 : 0.0;
  });
  if (truncated) *truncated = acc.mean(1);
  return acc.estimate(0);
}

Status status_from(simulate::LadderVerdict v) {
  switch (v) {
    case simulate::LadderVerdict::Divergent:
      return Status::Accessible;
    case simulate::LadderVerdict::Convergent:
      return Status::Inaccessible;
    case simulate::LadderVerdict::Undetermined:
      return Status::Undetermined;
  }
  return Status::Undetermined;
}

Estimate ratio_checked(const Estimate& num, const Estimate& den, const char* what) {
  if (!(den.value - 3.0 * den.std_error > 0.0))
    throw UnstableRatioError(std::string(what) + ": denominator " + std::to_string(den.value) + " +- " +
                             std::to_string(den.std_error) + " is consistent with zero");
  return ratio_independent(num, den);
}

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::Accessible:
      return "accessible";
    case Status::Inaccessible:
      return "inaccessible";
    case Status::Undetermined:
      return "undetermined";
  }
  return "undetermined";
}

const char* to_string(Criterion c) { return c == Criterion::FinitePoint ? "finite-point" : "infinity"; }

const char* to_string(MartinMethod m) { return m == MartinMethod::Occupation ? "occupation" : "symmetric-exit"; }

AccessibilityVerdict accessibility_finite(const ProcessModel& model, const Domain& D, const Point& z0, const Point& x,
                                          const RunOptions& opt, const AccessibilityOptions& aopt) {
  const StableProcess proc = StableProcess::from_model(model);
  require_inside(D, x, "accessibility_finite");
  require_same_dim(z0, D.dim(), "accessibility_finite");
  if (!D.on_boundary(z0)) throw ParameterError("accessibility_finite: z0 " + to_string(z0) + " is not on the boundary");
  if (aopt.k_max < aopt.k_min || aopt.occupation_samples < 1) throw ParameterError("accessibility_finite: bad ladder");
  const int rungs = aopt.k_max - aopt.k_min + 1;
  const int d = proc.dim();
  const int K = aopt.occupation_samples;
  const WalkLimits lim = limits(opt);
  // Columns: rungs partial sums, remainder, evidence, evidence-infinite flag, truncated flag.
  const std::size_t width = static_cast<std::size_t>(rungs) + 4;
  auto acc = run_samples(opt.plan(), width, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    std::vector<double> bins(static_cast<std::size_t>(rungs) + 2, 0.0);
    double evidence = 0.0;
    bool infinite = false;
    const ExitSample e = simulate::walk(proc, D, x, rng, lim, [&](const Point& c, double rho) {
      const double tau = proc.ball_exit_time(rho);
      for (int s = 0; s < K; ++s) {
        const Point y = c + simulate::occupation_sample(proc.alpha(), d, rng) * rho;
        const double dist = distance(y, z0);
        const double v = tau * proc.jump_density(dist) / K;
        const int k = static_cast<int>(std::floor(-std::log2(dist)));
        if (k < aopt.k_min)
          bins[0] += v;
        else if (k > aopt.k_max)
          bins[rungs + 1] += v;
        else
          bins[k - aopt.k_min + 1] += v;
      }
      if (distance(c, z0) > rho * (1.0 + 1e-12))
        evidence += proc.centered_poisson(c, rho, z0);
      else
        infinite = true;
    });
    double run = bins[0];
    for (int k = 0; k < rungs; ++k) {
      run += bins[k + 1];
      out[k] = run;
    }
    out[rungs] = bins[rungs + 1];
    out[rungs + 1] = infinite ? 0.0 : evidence;
    out[rungs + 2] = infinite ? 1.0 : 0.0;
    out[rungs + 3] = e.truncated ? 1.0 : 0.0;
  });
  AccessibilityVerdict v;
  v.criterion = Criterion::FinitePoint;
  std::vector<double> values;
  for (int k = 0; k < rungs; ++k) {
    v.scales.push_back(std::ldexp(1.0, -(aopt.k_min + k) - 1));
    v.ladder.push_back(acc.estimate(k));
    values.push_back(acc.mean(k));
  }
  for (int k = 1; k < rungs; ++k)
    v.growth.push_back(values[k - 1] > 0.0 ? (values[k] - values[k - 1]) / values[k - 1] : 0.0);
  v.status = status_from(simulate::classify_ladder(values, aopt.growth, aopt.converge));
  v.evidence = acc.estimate(rungs + 1);
  if (acc.mean(rungs + 2) > 0.0) {
    v.evidence.value = kInf;
    v.evidence.diverged = true;
  }
  v.truncated_fraction = acc.mean(rungs + 3);
  return v;
}

AccessibilityVerdict accessibility_infinity(const ProcessModel& model, const Domain& D, const Point& x,
                                            const RunOptions& opt, const AccessibilityOptions& aopt) {
  if (D.bounded()) throw ParameterError("accessibility_infinity: the domain is bounded");
  const simulate::MeanExitResult m = simulate::mean_exit_time(model, D, x, opt, aopt.time_ladder);
  AccessibilityVerdict v;
  v.criterion = Criterion::Infinity;
  v.scales = m.caps;
  v.ladder = m.ladder;
  v.growth = m.growth;
  v.status = status_from(m.verdict);
  v.evidence = m.estimate;
  v.truncated_fraction = m.truncated_fraction;
  return v;
}

PoissonKernelResult poisson_kernel(const ProcessModel& model, const Domain& D, const Point& x, const Point& z,
                                   const RunOptions& opt, const AccessibilityOptions& aopt) {
  const StableProcess proc = StableProcess::from_model(model);
  require_inside(D, x, "poisson_kernel");
  require_same_dim(z, D.dim(), "poisson_kernel");
  if (D.contains(z)) throw ParameterError("poisson_kernel: z " + to_string(z) + " lies inside the domain");
  PoissonKernelResult res;
  if (D.on_boundary(z)) {
    res.boundary_point = true;
    res.ladder = accessibility_finite(model, D, z, x, opt, aopt);
    res.estimate = res.ladder->evidence;
    return res;
  }
  res.estimate = poisson_sum(proc, D, x, z, opt);
  return res;
}

Estimate poisson_kernel_integral(const ProcessModel& model, const Domain& D, const Point& x, const Domain& A,
                                 const RunOptions& opt, const simulate::TargetQuadratureOptions& qopt) {
  const StableProcess proc = StableProcess::from_model(model);
  require_inside(D, x, "poisson_kernel_integral");
  const TargetQuadrature q = target_for(proc, D, A, qopt, "poisson_kernel_integral");
  const WalkLimits lim = limits(opt);
  auto acc = run_samples(opt.plan(), 1, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    out[0] = levy_walk(proc, D, x, rng, lim, {&q}).mass[0];
  });
  return acc.estimate(0);
}

std::vector<Estimate> green_occupation(const ProcessModel& model, const Domain& D, const Point& x,
                                       const std::vector<Point>& ys, const RunOptions& opt,
                                       const MartinOptions& mopt) {
  const StableProcess proc = StableProcess::from_model(model);
  if (!proc.transient()) throw UnsupportedModelError("green_occupation needs d > alpha");
  require_inside(D, x, "green_occupation");
  if (mopt.occupation_samples < 1 || !(mopt.margin >= 1.0)) throw ParameterError("green_occupation: bad options");
  const std::size_t m = ys.size();
  std::vector<double> rho0(m), tau0(m);
  for (std::size_t j = 0; j < m; ++j) {
    require_inside(D, ys[j], "green_occupation");
    if (ys[j] == x) throw SingularityError("green_occupation: probe coincides with the start point");
    rho0[j] = std::min(D.interior_radius(ys[j]), 0.5 * distance(x, ys[j]));
    tau0[j] = proc.ball_exit_time(rho0[j]);
  }
  const int d = proc.dim();
  const int K = mopt.occupation_samples;
  const double alpha = proc.alpha();
  const WalkLimits lim = limits(opt);
  auto acc = run_samples(opt.plan(), m, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    std::vector<Point> u(m * K);
    for (std::size_t j = 0; j < m; ++j)
      for (int s = 0; s < K; ++s) u[j * K + s] = ys[j] + simulate::occupation_sample(alpha, d, rng) * rho0[j];
    const ExitSample e = simulate::walk(proc, D, x, rng, lim, [&](const Point& c, double rho) {
      const double tau = proc.ball_exit_time(rho);
      for (std::size_t j = 0; j < m; ++j) {
        double w = 0.0;
        if (distance(c, ys[j]) >= rho + mopt.margin * rho0[j]) {
          for (int s = 0; s < K; ++s) w += proc.centered_poisson(c, rho, u[j * K + s]);
          w *= tau0[j];
        } else {
          for (int s = 0; s < K; ++s) {
            const Point v = c + simulate::occupation_sample(alpha, d, rng) * rho;
            w += proc.centered_poisson(ys[j], rho0[j], v);
          }
          w *= tau;
        }
        out[j] += w / K;
      }
    });
    (void)e;
  });
  std::vector<Estimate> res;
  for (std::size_t j = 0; j < m; ++j) res.push_back(acc.estimate(j));
  return res;
}

Estimate martin_ratio(const ProcessModel& model, const Domain& D, const Point& x, const Point& x0, const Point& y,
                      const RunOptions& opt, const MartinOptions& mopt) {
  const StableProcess proc = StableProcess::from_model(model);
  if (!proc.transient()) throw UnsupportedModelError("martin_ratio needs d > alpha");
  require_inside(D, x, "martin_ratio");
  require_inside(D, x0, "martin_ratio");
  require_inside(D, y, "martin_ratio");
  if (y == x || y == x0) throw SingularityError("martin_ratio: probe coincides with x or x0");
  if (x == x0) return Estimate{1.0, 0.0, opt.n, false};
  if (mopt.method == MartinMethod::Occupation) {
    const Estimate num = green_occupation(model, D, x, {y}, with_tag(opt, kTagNumerator), mopt)[0];
    const Estimate den = green_occupation(model, D, x0, {y}, with_tag(opt, kTagDenominator), mopt)[0];
    return ratio_checked(num, den, "martin_ratio");
  }
  const double gx = proc.green(distance(y, x)), gx0 = proc.green(distance(y, x0));
  const WalkLimits lim = limits(opt);
  auto acc = run_samples(with_tag(opt, kTagMain).plan(), 2, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    const ExitSample e = simulate::walk(proc, D, y, rng, lim);
    if (e.truncated) {
      out[0] = gx;
      out[1] = gx0;
      return;
    }
    out[0] = gx - proc.green(distance(e.exit_point, x));
    out[1] = gx0 - proc.green(distance(e.exit_point, x0));
  });
  const Estimate den = acc.estimate(1);
  if (!(den.value - 3.0 * den.std_error > 0.0))
    throw UnstableRatioError("martin_ratio: denominator is consistent with zero");
  return acc.ratio(0, 1);
}

namespace {

MartinReport martin_probes(const ProcessModel& model, const Domain& D, const Point& x, const Point& x0,
                           const std::vector<Point>& probes, const std::vector<double>& radii, const RunOptions& opt,
                           const MartinOptions& mopt) {
  MartinReport rep;
  rep.method = mopt.method;
  for (std::size_t k = 0; k < probes.size(); ++k)
    if (!D.contains(probes[k])) throw GeometryError("probe " + to_string(probes[k]) + " falls outside the domain");
  std::vector<Estimate> gx, gx0;
  if (mopt.method == MartinMethod::Occupation) {
    gx = green_occupation(model, D, x, probes, with_tag(opt, kTagNumerator), mopt);
    gx0 = x == x0 ? gx : green_occupation(model, D, x0, probes, with_tag(opt, kTagDenominator), mopt);
  }
  for (std::size_t k = 0; k < probes.size(); ++k) {
    MartinEntry e;
    e.radius = radii[k];
    e.probe = probes[k];
    try {
      if (mopt.method == MartinMethod::Occupation) {
        e.green_x = gx[k];
        e.green_x0 = gx0[k];
        e.ratio = x == x0 ? Estimate{1.0, 0.0, opt.n, false} : ratio_checked(gx[k], gx0[k], "martin ratio probe");
      } else {
        e.ratio = martin_ratio(model, D, x, x0, probes[k], with_tag(opt, probe_tag(k)), mopt);
      }
    } catch (const UnstableRatioError&) {
      if (k + 2 >= probes.size()) throw;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      e.ratio = Estimate{nan, nan, opt.n, false};
      e.unstable = true;
    }
    rep.ratio_sequence.push_back(e);
  }
  rep.normalization_residual = 0.0;
  const std::size_t m = rep.ratio_sequence.size();
  if (m >= 2) rep.cauchy_z = z_score(rep.ratio_sequence[m - 1].ratio, rep.ratio_sequence[m - 2].ratio);
  return rep;
}

void finish_prediction(MartinReport& rep) {
  rep.agreement_z = 0.0;
  if (!rep.has_prediction) return;
  const std::size_t m = rep.ratio_sequence.size();
  for (std::size_t k = 0; k < m; ++k) {
    if (rep.ratio_sequence[k].unstable) continue;
    rep.ratio_sequence[k].z = z_score(rep.ratio_sequence[k].ratio, rep.predicted_limit);
    if (k + 2 >= m) rep.agreement_z = std::max(rep.agreement_z, std::abs(rep.ratio_sequence[k].z));
  }
}

}  // namespace

MartinReport martin_limit_finite(const ProcessModel& model, const Domain& D, const Point& x, const Point& x0,
                                 const Point& z0, const std::vector<double>& radii, const RunOptions& opt,
                                 const MartinOptions& mopt, std::optional<Point> direction,
                                 const AccessibilityOptions& aopt) {
  const StableProcess proc = StableProcess::from_model(model);
  require_inside(D, x, "martin_limit_finite");
  require_inside(D, x0, "martin_limit_finite");
  const Point dir = unit(direction ? *direction : x0 - z0, "martin_limit_finite");
  std::vector<Point> probes;
  for (double r : radii) probes.push_back(z0 + dir * r);
  MartinReport rep = martin_probes(model, D, x, x0, probes, radii, opt, mopt);
  rep.verdict = accessibility_finite(model, D, z0, x0, with_tag(opt, kTagAnchor), aopt);
  if (rep.verdict.status == Status::Inaccessible) {
    rep.denominator = rep.verdict.evidence;
    rep.numerator = x == x0 ? rep.denominator : poisson_sum(proc, D, x, z0, with_tag(opt, kTagMain));
    rep.predicted_limit = x == x0 ? Estimate{1.0, 0.0, opt.n, false}
                                  : ratio_checked(rep.numerator, rep.denominator, "martin_limit_finite");
    rep.has_prediction = true;
  }
  finish_prediction(rep);
  return rep;
}

MartinReport martin_limit_infinity(const ProcessModel& model, const Domain& D, const Point& x, const Point& x0,
                                   const std::vector<double>& radii, const RunOptions& opt,
                                   const MartinOptions& mopt, std::optional<Point> direction,
                                   const AccessibilityOptions& aopt) {
  require_inside(D, x, "martin_limit_infinity");
  require_inside(D, x0, "martin_limit_infinity");
  if (D.bounded()) throw ParameterError("martin_limit_infinity: the domain is bounded");
  const Point dir = unit(direction ? *direction : x0, "martin_limit_infinity");
  std::vector<Point> probes;
  for (double r : radii) probes.push_back(dir * r);
  MartinReport rep = martin_probes(model, D, x, x0, probes, radii, opt, mopt);
  rep.verdict = accessibility_infinity(model, D, x0, with_tag(opt, kTagAnchor), aopt);
  if (rep.verdict.status == Status::Inaccessible) {
    rep.denominator = rep.verdict.evidence;
    rep.numerator = x == x0 ? rep.denominator
                            : simulate::mean_exit_time(model, D, x, with_tag(opt, kTagMain), aopt.time_ladder).estimate;
    rep.predicted_limit = x == x0 ? Estimate{1.0, 0.0, opt.n, false}
                                  : ratio_checked(rep.numerator, rep.denominator, "martin_limit_infinity");
    rep.has_prediction = true;
  }
  finish_prediction(rep);
  return rep;
}

namespace {

// Shared probe loop of the oscillation experiments. Columns per walk:
// f1, f2, c f1.
void oscillation_probes(const StableProcess& proc, const Domain& region, const std::vector<Point>& xs,
                        const std::vector<double>& labels, const TargetQuadrature& q1, const TargetQuadrature& q2,
                        double s1, double s2, double c, const Guide& g, const RunOptions& opt,
                        OscillationReport& rep, Estimate& scaled_final) {
  const WalkLimits lim = limits(opt);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!region.contains(xs[k])) throw GeometryError("probe " + to_string(xs[k]) + " falls outside the domain");
    auto acc = run_samples(with_tag(opt, probe_tag(k)).plan(), 3,
                           [&](RngStream& rng, std::uint64_t, std::span<double> out) {
                             const LevyWalk w = guided_walk(proc, region, xs[k], rng, lim, {&q1, &q2}, g);
                             out[0] = s1 * w.mass[0];
                             out[1] = s2 * w.mass[1];
                             out[2] = c * s1 * w.mass[0];
                           });
    OscillationProbe p;
    p.label = labels[k];
    p.x = xs[k];
    p.f1 = acc.estimate(0);
    p.f2 = acc.estimate(1);
    if (!(p.f2.value - 3.0 * p.f2.std_error > 0.0))
      throw DegenerateExperimentError("f2 at probe " + to_string(xs[k]) + " is consistent with zero");
    p.ratio = acc.ratio(0, 1);
    rep.probes.push_back(p);
    if (k + 1 == xs.size()) scaled_final = acc.ratio(2, 1);
  }
}

void oscillation_finish(const StableProcess& proc, const Domain& region, const Point& x_final,
                        const TargetQuadrature& q1, double s1, const MomentAccumulator& mass,
                        const Estimate& scaled_final, const Guide& g, const RunOptions& opt,
                        OscillationReport& rep) {
  rep.mass1 = mass.estimate(0);
  rep.mass2 = mass.estimate(1);
  if (!(rep.mass2.value - 3.0 * rep.mass2.std_error > 0.0))
    throw DegenerateExperimentError("mass of f2 is consistent with zero");
  rep.mass_ratio = mass.ratio(0, 1);
  const OscillationProbe& last = rep.probes.back();
  rep.final_z = z_score(last.ratio, rep.mass_ratio);
  for (auto& p : rep.probes) p.z = z_score(p.ratio, rep.mass_ratio);

  const WalkLimits lim = limits(opt);
  auto ctl = run_samples(with_tag(opt, kTagControl).plan(), 1, [&](RngStream& rng, std::uint64_t, std::span<double> out) {
    out[0] = s1 * guided_walk(proc, region, x_final, rng, lim, {&q1}, g).mass[0];
  });
  rep.control_ratio = ratio_independent(last.f1, ctl.estimate(0));
  rep.control_z = rep.control_ratio.std_error > 0.0 ? (rep.control_ratio.value - 1.0) / rep.control_ratio.std_error : 0.0;

  const Estimate scaled_mass = mass.ratio(2, 1);
  Estimate ror;
  ror.value = (scaled_final.value / last.ratio.value) / (scaled_mass.value / rep.mass_ratio.value);
  ror.n = last.ratio.n;
  rep.ratio_of_ratios = ror;
}

}  // namespace

OscillationReport oscillation_experiment_infinity(const ProcessModel& model, const Domain& D, double r,
                                                  const HarmonicSpec& f1, const HarmonicSpec& f2,
                                                  const std::vector<double>& probe_radii, const Point& direction,
                                                  const RunOptions& opt, const OscillationOptions& oopt) {
  const StableProcess proc = StableProcess::from_model(model);
  if (D.bounded()) throw ParameterError("oscillation_experiment_infinity: the domain is bounded");
  if (!(r > 0.0) || probe_radii.empty()) throw ParameterError("oscillation_experiment_infinity: bad radii");
  const Point origin = Point::zero(D.dim());
  const Domain region = geometry::truncate_outside(D, origin, r);
  const TargetQuadrature q1 = target_for(proc, region, f1.target, oopt.quadrature, "oscillation f1");
  const TargetQuadrature q2 = target_for(proc, region, f2.target, oopt.quadrature, "oscillation f2");
  for (const auto* q : {&q1, &q2})
    for (const Point& z : q->nodes)
      if (!(z.norm() <= r)) throw DomainError("oscillation targets must lie inside B(0, r)");
  const Point dir = unit(direction, "oscillation_experiment_infinity");
  std::vector<Point> xs;
  for (double R : probe_radii) xs.push_back(dir * R);
  const Guide guide = make_guide(region, origin, r, 2.0 * r);
  OscillationReport rep;
  Estimate scaled_final;
  const double c = oopt.scale_check;
  oscillation_probes(proc, region, xs, probe_radii, q1, q2, f1.scale, f2.scale, c, guide, opt, rep, scaled_final);

  // int f_i dm = |T_i| + int over the region of f_i.
  const double a1 = f1.scale * q1.total_weight(), a2 = f2.scale * q2.total_weight();
  const WalkLimits lim = limits(opt);
  auto mass = stratified(region, oopt.mass_points, with_tag(opt, kTagMass), {a1, a2, c * a1},
                         [&](const Point& y, double weight, RngStream& rng, std::span<double> out) {
                           const LevyWalk w = guided_walk(proc, region, y, rng, lim, {&q1, &q2}, guide);
                           out[0] = weight * f1.scale * w.mass[0];
                           out[1] = weight * f2.scale * w.mass[1];
                           out[2] = c * out[0];
                         });
  oscillation_finish(proc, region, xs.back(), q1, f1.scale, mass, scaled_final, guide, opt, rep);
  return rep;
}

OscillationReport oscillation_experiment_finite(const ProcessModel& model, const Domain& D, const Point& z0,
                                                double r, const HarmonicSpec& f1, const HarmonicSpec& f2,
                                                const std::vector<double>& probe_radii, const Point& direction,
                                                const RunOptions& opt, const OscillationOptions& oopt) {
  const StableProcess proc = StableProcess::from_model(model);
  require_same_dim(z0, D.dim(), "oscillation_experiment_finite");
  if (!(r > 0.0) || probe_radii.empty()) throw ParameterError("oscillation_experiment_finite: bad radii");
  const Domain region = geometry::truncate_inside(D, z0, r);
  const TargetQuadrature q1 = target_for(proc, region, f1.target, oopt.quadrature, "oscillation f1");
  const TargetQuadrature q2 = target_for(proc, region, f2.target, oopt.quadrature, "oscillation f2");
  for (const auto* q : {&q1, &q2})
    for (const Point& z : q->nodes)
      if (!(distance(z, z0) >= r)) throw DomainError("oscillation targets must lie outside B(z0, r)");
  const Point dir = unit(direction, "oscillation_experiment_finite");
  std::vector<Point> xs;
  for (double s : probe_radii) xs.push_back(z0 + dir * s);
  const Guide guide = make_guide(region, z0, 0.5 * r, r);
  OscillationReport rep;
  Estimate scaled_final;
  const double c = oopt.scale_check;
  oscillation_probes(proc, region, xs, probe_radii, q1, q2, f1.scale, f2.scale, c, guide, opt, rep, scaled_final);

  // int j(z0, y) f_i(y) dy = int_T j(z0, .) + int over the region of j(z0, .) f_i.
  const double a1 = f1.scale * weighted_target_mass(proc, q1, z0);
  const double a2 = f2.scale * weighted_target_mass(proc, q2, z0);
  constexpr int kLambda = 6;
  for (int k = 0; k < kLambda; ++k) rep.lambda_radii.push_back(r * std::ldexp(1.0, -k));
  std::vector<double> base{a1, a2, c * a1};
  for (int k = 0; k < kLambda; ++k) base.push_back(a1);
  const WalkLimits lim = limits(opt);
  auto mass = stratified(region, oopt.mass_points, with_tag(opt, kTagMass), base,
                         [&](const Point& y, double weight, RngStream& rng, std::span<double> out) {
                           const LevyWalk w = guided_walk(proc, region, y, rng, lim, {&q1, &q2}, guide);
                           const double dist = distance(y, z0);
                           const double jw = weight * proc.jump_density(dist);
                           out[0] = jw * f1.scale * w.mass[0];
                           out[1] = jw * f2.scale * w.mass[1];
                           out[2] = c * out[0];
                           for (int k = 0; k < kLambda; ++k)
                             if (dist > rep.lambda_radii[k]) out[3 + k] = out[0];
                         });
  oscillation_finish(proc, region, xs.back(), q1, f1.scale, mass, scaled_final, guide, opt, rep);
  for (int k = 0; k < kLambda; ++k) {
    rep.lambda_ladder.push_back(mass.estimate(3 + k));
    if (k > 0 && rep.lambda_ladder[k].value < rep.lambda_ladder[k - 1].value) rep.lambda_monotone = false;
  }
  return rep;
}

DecompositionReport decomposition_check(const ProcessModel& model, const Domain& D, const Point& z0, double p,
                                        double q, double r, const HarmonicSpec& f, const std::vector<Point>& x_probes,
                                        const RunOptions& opt, const DecompositionOptions& dopt) {
  const StableProcess proc = StableProcess::from_model(model);
  require_same_dim(z0, D.dim(), "decomposition_check");
  if (!(p > 0.0 && p < q && q < 1.0 && r > 0.0)) throw ParameterError("decomposition_check needs 0 < p < q < 1, r > 0");
  if (!(8.0 * p < q)) throw ParameterError("decomposition_check needs 8p < q");
  if (auto box = D.bounding_box()) {
    const auto& [lo, hi] = *box;
    for (int i = 0; i < D.dim(); ++i)
      if (lo[i] < z0[i] - r - 1e-12 || hi[i] > z0[i] + r + 1e-12)
        throw DomainError("decomposition_check: the domain must lie inside B(z0, r)");
  } else {
    throw DomainError("decomposition_check: the domain must be bounded");
  }
  const TargetQuadrature tq = target_for(proc, D, f.target, dopt.quadrature, "decomposition f");
  for (const Point& z : tq.nodes)
    if (!(distance(z, z0) >= r)) throw DomainError("decomposition_check: the target must lie outside B(z0, r)");
  const double pr = p * r, qr = q * r;
  const Domain inner = geometry::truncate_inside(D, z0, pr);
  const Domain inner8 = geometry::truncate_inside(D, z0, 8.0 * pr);
  const WalkLimits lim = limits(opt);
  const double s = f.scale;

  DecompositionReport rep;
  rep.p = p;
  rep.q = q;
  rep.r = r;
  rep.epsilon = dopt.epsilon;

  // Lambda_qr(f) = int_T j(z0, .) + int over D minus B(z0, qr) of j(z0, .) f.
  const double a = s * weighted_target_mass(proc, tq, z0);
  auto lam = stratified(D, dopt.mass_points, with_tag(opt, kTagMass), {a},
                        [&](const Point& y, double weight, RngStream& rng, std::span<double> out) {
                          const double dist = distance(y, z0);
                          if (!(dist > qr)) return;
                          out[0] = weight * proc.jump_density(dist) * s * levy_walk(proc, D, y, rng, lim, {&tq}).mass[0];
                        });
  rep.lambda = lam.estimate(0);

  // Stage one in the inner set, then continuation in D from the exit point.
  // Columns: part, tilde, exit time of the inner set.
  auto split = [&](const Domain& in, const Point& x, RngStream& rng, std::span<double> out) {
    double tilde = 0.0;
    const ExitSample e = simulate::walk(proc, in, x, rng, lim, [&](const Point& c, double rho) {
      tilde += simulate::target_step_mass(proc, tq, c, rho);
    });
    out[2] = e.time_weight;
    if (e.truncated || !D.contains(e.exit_point)) {
      out[1] = s * tilde;
      return;
    }
    const double cont = levy_walk(proc, D, e.exit_point, rng, lim, {&tq}).mass[0];
    if (distance(e.exit_point, z0) < qr) {
      out[0] = s * cont;
      out[1] = s * tilde;
    } else {
      out[1] = s * (tilde + cont);
    }
  };

  rep.additivity_holds = true;
  rep.bound_holds = true;
  for (std::size_t k = 0; k < x_probes.size(); ++k) {
    const Point& x = x_probes[k];
    if (!inner.contains(x)) throw GeometryError("probe " + to_string(x) + " is not in D cap B(z0, pr)");
    DecompositionProbe dp;
    dp.x = x;
    const RunOptions base = with_tag(opt, probe_tag(k));
    auto direct = run_samples(with_tag(base, kTagDirect).plan(), 1,
                              [&](RngStream& rng, std::uint64_t, std::span<double> out) {
                                out[0] = s * levy_walk(proc, D, x, rng, lim, {&tq}).mass[0];
                              });
    dp.f_direct = direct.estimate(0);
    auto parts = run_samples(with_tag(base, kTagStage).plan(), 3,
                             [&](RngStream& rng, std::uint64_t, std::span<double> out) { split(inner, x, rng, out); });
    dp.f_part = parts.estimate(0);
    dp.f_tilde = parts.estimate(1);
    dp.sum = parts.estimate(0);
    dp.sum.value += dp.f_tilde.value;
    dp.sum.std_error = std::sqrt(std::max(0.0, parts.mean_covariance(0, 0) + parts.mean_covariance(1, 1) +
                                                   2.0 * parts.mean_covariance(0, 1)));
    dp.z = z_score(dp.sum, dp.f_direct);
    auto parts8 = run_samples(with_tag(base, kTagMain).plan(), 3, [&](RngStream& rng, std::uint64_t,
                                                                      std::span<double> out) {
      split(inner8, x, rng, out);
    });
    dp.f_tilde_8 = parts8.estimate(1);
    dp.exit_time_8 = parts8.estimate(2);
    dp.bound_ratio = ratio_independent(parts8.ratio(1, 2), rep.lambda);
    const double lo = 1.0 / (1.0 + dopt.epsilon), hi = 1.0 + dopt.epsilon;
    dp.bound_holds = dp.bound_ratio.value >= lo && dp.bound_ratio.value <= hi;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(dp.z));
    if (!(std::abs(dp.z) <= 3.0)) rep.additivity_holds = false;
    if (!dp.bound_holds) rep.bound_holds = false;
    rep.probes.push_back(dp);
  }
  return rep;
}

FactorizationReport factorization_probe(const ProcessModel& model, FactorizationKind kind,
                                        const std::vector<Domain>& domains, const Point& z0, double r, double a,
                                        const std::vector<HarmonicSpec>& harmonics, const std::vector<Point>& x_grid,
                                        const RunOptions& opt, const FactorizationOptions& fopt) {
  const StableProcess proc = StableProcess::from_model(model);
  if (kind == FactorizationKind::F1 && !(a > 0.5 && a < 1.0)) throw ParameterError("F1 probes need a in (1/2, 1)");
  if (kind == FactorizationKind::F2 && !(a > 1.0 && a < 2.0)) throw ParameterError("F2 probes need a in (1, 2)");
  if (!(r > 0.0) || domains.empty() || harmonics.empty()) throw ParameterError("factorization_probe: empty input");
  FactorizationReport rep;
  rep.kind = kind;
  rep.a = a;
  rep.r = r;
  const WalkLimits lim = limits(opt);
  for (std::size_t di = 0; di < domains.size(); ++di) {
    const Domain& D = domains[di];
    require_same_dim(z0, D.dim(), "factorization_probe");
    double c_hat = 1.0;
    for (std::size_t hi = 0; hi < harmonics.size(); ++hi) {
      const HarmonicSpec& h = harmonics[hi];
      const TargetQuadrature tq = target_for(proc, D, h.target, fopt.quadrature, "factorization harmonic");
      const RunOptions base = with_tag(opt, probe_tag(di * harmonics.size() + hi));
      Estimate weight;
      if (kind == FactorizationKind::F1) {
        for (const Point& z : tq.nodes)
          if (!(distance(z, z0) >= r)) throw DomainError("F1 harmonics need targets outside B(z0, r)");
        const double cut = 0.5 * a * r;
        double t = 0.0;
        for (std::size_t j = 0; j < tq.nodes.size(); ++j)
          if (distance(tq.nodes[j], z0) > cut)
            t += tq.weights[j] * proc.jump_density(distance(tq.nodes[j], z0));
        auto lam = stratified(D, fopt.mass_points, with_tag(base, kTagMass), {h.scale * t},
                              [&](const Point& y, double w, RngStream& rng, std::span<double> out) {
                                const double dist = distance(y, z0);
                                if (!(dist > cut)) return;
                                out[0] = w * proc.jump_density(dist) * h.scale *
                                         levy_walk(proc, D, y, rng, lim, {&tq}).mass[0];
                              });
        weight = lam.estimate(0);
      } else {
        for (const Point& z : tq.nodes)
          if (!(distance(z, z0) <= r)) throw DomainError("F2 harmonics need targets inside B(z0, r)");
        const double R = 2.0 * a * r;
        double t = 0.0;
        for (std::size_t j = 0; j < tq.nodes.size(); ++j)
          if (distance(tq.nodes[j], z0) < R) t += tq.weights[j];
        const Domain near = geometry::truncate_inside(D, z0, R);
        auto mass = stratified(near, fopt.mass_points, with_tag(base, kTagMass), {h.scale * t},
                               [&](const Point& y, double w, RngStream& rng, std::span<double> out) {
                                 out[0] = w * h.scale * levy_walk(proc, D, y, rng, lim, {&tq}).mass[0];
                               });
        weight = mass.estimate(0);
      }
      for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
        const Point& x = x_grid[xi];
        if (!D.contains(x)) continue;
        const double dx = distance(x, z0);
        if (kind == FactorizationKind::F1 && !(dx < r / 8.0)) continue;
        if (kind == FactorizationKind::F2 && !(dx > 8.0 * r)) continue;
        auto acc = run_samples(with_tag(base, probe_tag(xi)).plan(), 2,
                               [&](RngStream& rng, std::uint64_t, std::span<double> out) {
                                 const LevyWalk w = levy_walk(proc, D, x, rng, lim, {&tq}, &z0);
                                 out[0] = h.scale * w.mass[0];
                                 out[1] = kind == FactorizationKind::F1 ? w.exit.time_weight : w.poisson_z0;
                               });
        FactorizationEntry e;
        e.domain = D.to_string();
        e.harmonic = h.label.empty() ? h.target.to_string() : h.label;
        e.x = x;
        e.f = acc.estimate(0);
        const Estimate lead = acc.estimate(1);
        e.factor.value = lead.value * weight.value;
        e.factor.std_error = std::hypot(lead.std_error * weight.value, lead.value * weight.std_error);
        e.factor.n = lead.n;
        e.deviation = e.f.value > 0.0 && e.factor.value > 0.0
                          ? std::max(e.f.value / e.factor.value, e.factor.value / e.f.value)
                          : kInf;
        c_hat = std::max(c_hat, e.deviation);
        rep.entries.push_back(e);
      }
    }
    rep.c_hat.push_back(c_hat);
    rep.c_hat_max = std::max(rep.c_hat_max, c_hat);
  }
  return rep;
}

}  // namespace levypot::potential
