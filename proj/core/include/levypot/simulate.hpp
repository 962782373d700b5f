#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "levypot/estimate.hpp"
#include "levypot/geometry.hpp"
#include "levypot/kernels.hpp"
#include "levypot/parallel.hpp"
#include "levypot/point.hpp"
#include "levypot/rng.hpp"

namespace levypot::simulate {

using geometry::Domain;
using kernels::ProcessModel;

// Isotropic alpha-stable process with the closed-form ball quantities used by
// the sphere walk.
class StableProcess {
 public:
  StableProcess(int d, double alpha);
  // Throws UnsupportedModelError unless the model is isotropic stable.
  static StableProcess from_model(const ProcessModel& model);

  int dim() const { return d_; }
  double alpha() const { return alpha_; }
  bool transient() const { return d_ > alpha_; }
  // E_c tau_{B(c, rho)} = c_time * rho^alpha.
  double c_time() const { return c_time_; }
  double ball_exit_time(double radius) const { return c_time_ * std::pow(radius, alpha_); }
  double jump_density(double r) const { return c_jump_ * std::pow(r, -d_ - alpha_); }
  double poisson_constant() const { return c_poisson_; }
  double green(double r) const;
  // Poisson kernel of B(center, radius) started at its center.
  double centered_poisson(const Point& center, double radius, const Point& z) const;
  // Poisson kernel of B(center, radius) started at x.
  double poisson(const Point& center, double radius, const Point& x, const Point& z) const;

 private:
  int d_;
  double alpha_;
  double c_time_;
  double c_jump_;
  double c_poisson_;
  double c_green_;
};

// Exit position from B(0,1) started at 0: |Z| = sqrt(1 + G_a / G_b) with
// G_a ~ Gamma(1 - alpha/2), G_b ~ Gamma(alpha/2), uniform direction.
double centered_exit_radius(double alpha, RngStream& rng);

// Exit position from the unit ball started at x_rel (|x_rel| < 1).
Point ball_exit_sample(double alpha, int d, const Point& x_rel, RngStream& rng);

// Point of B(0,1) drawn from the occupation law G_B(0, v) dv / E_0 tau_B; needs d > alpha.
Point occupation_sample(double alpha, int d, RngStream& rng);

struct ExitSample {
  Point exit_point;
  double time_weight = 0.0;
  std::uint64_t steps = 0;
  bool truncated = false;
  // Stopped because time_weight reached the time cap.
  bool time_capped = false;
};

struct WalkLimits {
  std::uint64_t max_steps = 10000;
  double time_cap = std::numeric_limits<double>::infinity();
};

// Sphere walk with centered maximal balls. on_step(center, radius) runs before
// each ball exit is drawn.
template <class OnStep>
ExitSample walk(const StableProcess& proc, const Domain& D, const Point& x, RngStream& rng, const WalkLimits& limits,
                OnStep&& on_step) {
  ExitSample s;
  Point cur = x;
  const int d = proc.dim();
  while (D.contains(cur)) {
    if (s.steps >= limits.max_steps) {
      s.truncated = true;
      break;
    }
    if (s.time_weight >= limits.time_cap) {
      s.time_capped = true;
      break;
    }
    const double rho = D.interior_radius(cur);
    on_step(static_cast<const Point&>(cur), rho);
    s.time_weight += proc.ball_exit_time(rho);
    const double radius = centered_exit_radius(proc.alpha(), rng);
    cur += rng.direction(d) * (rho * radius);
    ++s.steps;
  }
  s.exit_point = cur;
  return s;
}

inline ExitSample walk(const StableProcess& proc, const Domain& D, const Point& x, RngStream& rng,
                       const WalkLimits& limits = {}) {
  return walk(proc, D, x, rng, limits, [](const Point&, double) {});
}

ExitSample walk_exit(const ProcessModel& model, const Domain& D, const Point& x, RngStream& rng,
                     std::uint64_t budget = 10000);

// Shared Monte Carlo settings. Estimators draw from streams (seed, tag, chunk).
struct RunOptions {
  std::uint64_t n = 100000;
  std::uint64_t seed = 1;
  std::uint64_t tag = 0;
  int workers = 1;
  std::uint64_t budget = 10000;

  SamplingPlan plan(std::uint64_t tag_offset = 0) const { return {n, seed, tag + tag_offset, workers, 1024}; }
};

// Escalating time-cap ladder for divergence verdicts.
struct LadderOptions {
  // First cap; 0 selects 100 times the mean exit time of the first ball.
  double t0 = 0.0;
  int doublings = 4;
  double growth = 0.25;
  double converge = 0.01;
};

enum class LadderVerdict { Convergent, Divergent, Undetermined };

// Classifies increasing partial values: Divergent iff every rung grows by at
// least `growth`, Convergent iff the last three relative increments are below
// `converge`.
LadderVerdict classify_ladder(const std::vector<double>& values, double growth, double converge);

const char* to_string(LadderVerdict v);

struct MeanExitResult {
  Estimate estimate;
  std::vector<double> caps;
  std::vector<Estimate> ladder;
  std::vector<double> growth;
  LadderVerdict verdict = LadderVerdict::Undetermined;
  double truncated_fraction = 0.0;
  double capped_fraction = 0.0;
};

// E_x tau_D from time weights; rung k averages min(time_weight, caps[k]).
MeanExitResult mean_exit_time(const ProcessModel& model, const Domain& D, const Point& x, const RunOptions& opt,
                              const LadderOptions& ladder = {});

// E_x tau_D without a ladder; walks stop at the step budget.
Estimate mean_exit_time_plain(const StableProcess& proc, const Domain& D, const Point& x, const RunOptions& opt);

// G_D(x, y) = g(|x - y|) - E_x g(|X_tau - y|); transient models only.
Estimate green_function(const ProcessModel& model, const Domain& D, const Point& x, const Point& y,
                        const RunOptions& opt);

struct HarmonicResult {
  Estimate estimate;
  std::uint64_t truncated = 0;
  bool warning = false;
};

using BoundaryData = std::function<double(const Point&)>;

// x -> E_x f(X_tau); truncated walks contribute 0 and are counted.
HarmonicResult harmonic_eval(const ProcessModel& model, const Domain& D, const BoundaryData& f, const Point& x,
                             const RunOptions& opt);

// Nodes and weights for integrals over a target set outside D.
struct TargetQuadrature {
  std::vector<Point> nodes;
  std::vector<double> weights;
  double total_weight() const;
};

struct TargetQuadratureOptions {
  int radial = 12;
  int angular = 48;
  // Cells per axis for the bounding-box fallback.
  int grid = 64;
  // Ball complements use r = R t^{-1/decay}, exact for kernels decaying like r^{-d-decay}.
  double decay = 1.0;
};

// Balls and shells use radial Gauss-Legendre times an angular rule; ball
// complements map the radius to (0, 1); other bounded sets use a midpoint grid.
TargetQuadrature target_quadrature(const Domain& A, const TargetQuadratureOptions& opt = {});

// Sum over quadrature nodes of w_j P_B(center, z_j) for a centered ball step.
double target_step_mass(const StableProcess& proc, const TargetQuadrature& q, const Point& center, double radius);

struct LevySystemReport {
  Estimate direct;  // P_x(X_tau in A)
  Estimate levy;    // int_A P_D(x, z) dz
  Estimate difference;
  double z = 0.0;
  std::uint64_t truncated = 0;
};

// Paired comparison of the exit indicator with the per-step Poisson-kernel mass.
LevySystemReport levy_system_check(const ProcessModel& model, const Domain& D, const Point& x, const Domain& A,
                                   const RunOptions& opt, const TargetQuadratureOptions& qopt = {});

// Positive beta-stable variable with E exp(-l S) = exp(-l^beta), beta in (0,1) (Kanter).
double positive_stable(double beta, RngStream& rng);

// Increment S_h of the subordinator of a subordinate Brownian motion model:
// stable, gamma and geometric stable families are sampled exactly.
class SubordinatorIncrement {
 public:
  explicit SubordinatorIncrement(const ProcessModel& model);
  double operator()(double h, RngStream& rng) const;
  // Exponent a of the time step h = c * clearance^a.
  double step_exponent() const { return step_exponent_; }

 private:
  bernstein::Family family_;
  double beta_ = 1.0;
  double step_exponent_ = 2.0;
};

struct SubordinatedWalkOptions {
  double step_factor = 1e-3;
  double min_clearance = 1e-8;
  std::uint64_t max_steps = 100000000;
};

// Small-step path simulation X_{t+h} = X_t + sqrt(2 S_h) N with
// h = step_factor * clearance^a; time_weight holds the elapsed time. Carries a
// time-step bias of order step_factor; independent of the sphere walk.
ExitSample subordinated_walk_exit(const ProcessModel& model, const Domain& D, const Point& x, RngStream& rng,
                                  const SubordinatedWalkOptions& opt = {});

}  // namespace levypot::simulate
