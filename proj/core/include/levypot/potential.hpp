#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levypot/estimate.hpp"
#include "levypot/geometry.hpp"
#include "levypot/kernels.hpp"
#include "levypot/point.hpp"
#include "levypot/simulate.hpp"

namespace levypot::potential {

using geometry::Domain;
using kernels::ProcessModel;
using simulate::RunOptions;

enum class Status { Accessible, Inaccessible, Undetermined };
enum class Criterion { FinitePoint, Infinity };

const char* to_string(Status s);
const char* to_string(Criterion c);

struct AccessibilityVerdict {
  Status status = Status::Undetermined;
  Criterion criterion = Criterion::FinitePoint;
  // Annulus inner radii (finite point) or time caps (infinity), one per rung.
  std::vector<double> scales;
  // Partial sums (finite point) or capped mean exit times (infinity).
  std::vector<Estimate> ladder;
  std::vector<double> growth;
  // P_D(x, z0) or E_x tau_D estimate.
  Estimate evidence;
  double truncated_fraction = 0.0;
};

struct AccessibilityOptions {
  // Annuli B(z0, 2^-k) \ B(z0, 2^-k-1) for k_min <= k <= k_max.
  int k_min = 1;
  int k_max = 6;
  int occupation_samples = 2;
  double growth = 0.25;
  double converge = 0.01;
  simulate::LadderOptions time_ladder{};
};

// P_D(x, z0) by the annular ladder; Accessible iff every rung grows by the
// growth threshold, Inaccessible iff the last three increments fall below the
// convergence threshold.
AccessibilityVerdict accessibility_finite(const ProcessModel& model, const Domain& D, const Point& z0, const Point& x,
                                          const RunOptions& opt, const AccessibilityOptions& aopt = {});

// E_x tau_D by the time-cap ladder; D must be unbounded.
AccessibilityVerdict accessibility_infinity(const ProcessModel& model, const Domain& D, const Point& x,
                                            const RunOptions& opt, const AccessibilityOptions& aopt = {});

struct PoissonKernelResult {
  Estimate estimate;
  bool boundary_point = false;
  // Annular ladder, present when z lies on the boundary.
  std::optional<AccessibilityVerdict> ladder;
};

// P_D(x, z) = E_x sum_k P_{B_k}(X_k, z) over the sphere walk.
PoissonKernelResult poisson_kernel(const ProcessModel& model, const Domain& D, const Point& x, const Point& z,
                                   const RunOptions& opt, const AccessibilityOptions& aopt = {});

// int_A P_D(x, z) dz for a target set A outside the closure of D.
Estimate poisson_kernel_integral(const ProcessModel& model, const Domain& D, const Point& x, const Domain& A,
                                 const RunOptions& opt, const simulate::TargetQuadratureOptions& qopt = {});

enum class MartinMethod {
  // Walks from x; each step contributes an occupation-smoothed kernel term near y.
  Occupation,
  // Walks from y with G_D(y, .) = g - E_y g(|X_tau - .|), shared for x and x0.
  SymmetricExit,
};

const char* to_string(MartinMethod m);

struct MartinOptions {
  MartinMethod method = MartinMethod::Occupation;
  int occupation_samples = 2;
  // Steps with |c - y| >= rho + margin * rho0 use the far-field term.
  double margin = 2.0;
};

// G_D(x, y_k) for every probe from one set of walks started at x.
std::vector<Estimate> green_occupation(const ProcessModel& model, const Domain& D, const Point& x,
                                       const std::vector<Point>& ys, const RunOptions& opt,
                                       const MartinOptions& mopt = {});

// M_D(x, y) = G_D(x, y) / G_D(x0, y).
Estimate martin_ratio(const ProcessModel& model, const Domain& D, const Point& x, const Point& x0, const Point& y,
                      const RunOptions& opt, const MartinOptions& mopt = {});

struct MartinEntry {
  double radius = 0.0;
  Point probe;
  Estimate green_x;
  Estimate green_x0;
  Estimate ratio;
  // z-score of ratio against the predicted limit (0 without a prediction).
  double z = 0.0;
  // Denominator consistent with zero; ratio is NaN. Only allowed before the
  // last two probes, which carry the limit comparison.
  bool unstable = false;
};

struct MartinReport {
  std::vector<MartinEntry> ratio_sequence;
  AccessibilityVerdict verdict;
  bool has_prediction = false;
  Estimate predicted_limit;
  Estimate numerator;
  Estimate denominator;
  // max |z| over the last two probes; computed only with a prediction.
  double agreement_z = 0.0;
  // z-score between the last two ratios.
  double cauchy_z = 0.0;
  double normalization_residual = 0.0;
  MartinMethod method = MartinMethod::Occupation;
};

// Probes y_k = z0 + radii[k] * direction; direction defaults to the unit
// vector from z0 toward x0.
MartinReport martin_limit_finite(const ProcessModel& model, const Domain& D, const Point& x, const Point& x0,
                                 const Point& z0, const std::vector<double>& radii, const RunOptions& opt,
                                 const MartinOptions& mopt = {}, std::optional<Point> direction = std::nullopt,
                                 const AccessibilityOptions& aopt = {});

// Probes y_k = radii[k] * direction; direction defaults to x0 / |x0|.
MartinReport martin_limit_infinity(const ProcessModel& model, const Domain& D, const Point& x, const Point& x0,
                                   const std::vector<double>& radii, const RunOptions& opt,
                                   const MartinOptions& mopt = {}, std::optional<Point> direction = std::nullopt,
                                   const AccessibilityOptions& aopt = {});

// Harmonic function f(x) = scale * P_x(X_tau in target) for a target set outside the domain.
struct HarmonicSpec {
  Domain target;
  double scale = 1.0;
  std::string label;
};

struct OscillationOptions {
  // Stratified points for the mass integrals over the domain.
  std::uint64_t mass_points = 200000;
  simulate::TargetQuadratureOptions quadrature{};
  // Constant applied to f1 for the ratio-of-ratios check.
  double scale_check = 3.0;
};

struct OscillationProbe {
  double label = 0.0;
  Point x;
  Estimate f1;
  Estimate f2;
  Estimate ratio;
  double z = 0.0;
};

struct OscillationReport {
  std::vector<OscillationProbe> probes;
  Estimate mass1;
  Estimate mass2;
  Estimate mass_ratio;
  double final_z = 0.0;
  // f1 against an independent copy of f1 at the final probe.
  Estimate control_ratio;
  double control_z = 0.0;
  // (c f1 / f2) / (c mass1 / mass2) at the final probe.
  Estimate ratio_of_ratios;
  // Finite case: Lambda_p(f1) for p = r / 2^k, k = 0, 1, ...
  std::vector<double> lambda_radii;
  std::vector<Estimate> lambda_ladder;
  bool lambda_monotone = true;
};

// Infinity: f_i regular harmonic in D minus the closed ball B(0, r), targets inside
// B(0, r); probes x_k = probe_radii[k] * direction.
OscillationReport oscillation_experiment_infinity(const ProcessModel& model, const Domain& D, double r,
                                                  const HarmonicSpec& f1, const HarmonicSpec& f2,
                                                  const std::vector<double>& probe_radii, const Point& direction,
                                                  const RunOptions& opt, const OscillationOptions& oopt = {});

// Finite point: f_i regular harmonic in D cap B(z0, r), targets outside B(z0, r);
// probes x_k = z0 + probe_radii[k] * direction; masses are j(z0, .)-weighted.
OscillationReport oscillation_experiment_finite(const ProcessModel& model, const Domain& D, const Point& z0,
                                                double r, const HarmonicSpec& f1, const HarmonicSpec& f2,
                                                const std::vector<double>& probe_radii, const Point& direction,
                                                const RunOptions& opt, const OscillationOptions& oopt = {});

struct DecompositionProbe {
  Point x;
  Estimate f_direct;
  Estimate f_part;   // f_{pr,qr}
  Estimate f_tilde;  // complement piece
  Estimate sum;
  double z = 0.0;
  // Two-sided bound at the inner radius 8pr.
  Estimate f_tilde_8;
  Estimate exit_time_8;
  Estimate bound_ratio;  // f_tilde_8 / (E_x tau_{D_8pr} Lambda_qr(f))
  bool bound_holds = false;
};

struct DecompositionReport {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
  double epsilon = 0.0;
  Estimate lambda;  // Lambda_qr(f)
  std::vector<DecompositionProbe> probes;
  bool additivity_holds = false;
  bool bound_holds = false;
  double max_abs_z = 0.0;
};

struct DecompositionOptions {
  double epsilon = 0.5;
  std::uint64_t mass_points = 200000;
  simulate::TargetQuadratureOptions quadrature{};
};

// D must lie inside B(z0, r); f = scale * P_x(X_tau_D in target) with the
// target outside B(z0, r).
DecompositionReport decomposition_check(const ProcessModel& model, const Domain& D, const Point& z0, double p,
                                        double q, double r, const HarmonicSpec& f, const std::vector<Point>& x_probes,
                                        const RunOptions& opt, const DecompositionOptions& dopt = {});

enum class FactorizationKind { F1, F2 };

struct FactorizationEntry {
  std::string domain;
  std::string harmonic;
  Point x;
  Estimate f;
  Estimate factor;  // E_x tau_D Lambda (F1) or P_D(x, z0) int f (F2)
  double deviation = 1.0;
};

struct FactorizationReport {
  FactorizationKind kind = FactorizationKind::F1;
  double a = 0.0;
  double r = 0.0;
  std::vector<FactorizationEntry> entries;
  // Per domain, max over its entries of max(f / factor, factor / f).
  std::vector<double> c_hat;
  double c_hat_max = 1.0;
};

struct FactorizationOptions {
  std::uint64_t mass_points = 100000;
  simulate::TargetQuadratureOptions quadrature{};
};

// Empirical constant C(a) of the factorization bounds over domains, harmonics
// and probe points. F1 needs a in (1/2, 1), F2 needs a in (1, 2).
FactorizationReport factorization_probe(const ProcessModel& model, FactorizationKind kind,
                                        const std::vector<Domain>& domains, const Point& z0, double r, double a,
                                        const std::vector<HarmonicSpec>& harmonics, const std::vector<Point>& x_grid,
                                        const RunOptions& opt, const FactorizationOptions& fopt = {});

}  // namespace levypot::potential
