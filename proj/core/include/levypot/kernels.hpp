#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "levypot/bernstein.hpp"
#include "levypot/point.hpp"
#include "levypot/quadrature.hpp"

namespace levypot::kernels {

using bernstein::CompleteBernsteinFunction;

// Isotropic alpha-stable closed forms (characteristic exponent |xi|^alpha).
double stable_jump_constant(int d, double alpha);
double stable_jump_density(int d, double alpha, double r);
double stable_green_constant(int d, double alpha);
double stable_poisson_constant(int d, double alpha);
// E_x tau_{B(0,rho)} = exit_time_constant * (rho^2 - |x|^2)^{alpha/2}.
double stable_exit_time_constant(int d, double alpha);
double ball_mean_exit_time(int d, double alpha, double radius, double dist_from_center);
double ball_poisson_kernel(int d, double alpha, const Point& center, double radius, const Point& x, const Point& z);
double ball_green_function(int d, double alpha, const Point& center, double radius, const Point& x, const Point& y);

// Subordination integrals j(r) = int g(t,r) mu(t) dt and g(r) = int g(t,r) u(t) dt.
QuadResult subordinate_jump_density(const CompleteBernsteinFunction& f, int d, double r);
QuadResult free_green_density(const CompleteBernsteinFunction& f, int d, double r);

// Fraction of the subordination integral carried by t < eta.
double truncation_tail_fraction(const CompleteBernsteinFunction& f, int d, double eta, double r);
// Supremum of the fraction over a log grid of r in (r0, r_hi].
double truncation_tail_sup(const CompleteBernsteinFunction& f, int d, double eta, double r0, double r_hi = 100.0,
                           std::size_t grid = 64);

enum class ModelKind { Stable, SubordinateBM, Anisotropic };

class ProcessModel {
 public:
  using DirectionFn = std::function<double(const Point&)>;

  static ProcessModel stable(int d, double alpha);
  static ProcessModel subordinate_bm(int d, const CompleteBernsteinFunction& f);
  static ProcessModel anisotropic(const ProcessModel& base, DirectionFn k, const std::string& k_name);
  // "stable:d=2:alpha=1.0", "sbm:d=3:gamma", "aniso:stable:d=2:alpha=1.0:k=cosine".
  static ProcessModel parse(const std::string& id);

  int dim() const;
  ModelKind kind() const;
  const std::string& id() const;
  bool isotropic() const { return kind() != ModelKind::Anisotropic; }
  // True for the isotropic stable kind, which has exact ball samplers.
  bool is_stable() const { return kind() == ModelKind::Stable; }
  double alpha() const;
  const CompleteBernsteinFunction* subordinator() const;
  double k_min() const;
  double k_max() const;

  // Radial profile j(r) (the base profile for anisotropic models).
  double jump_density(double r) const;
  double jump_density(const Point& x, const Point& y) const;
  bool has_green() const;
  double green(double r) const;
  double psi0(double r) const;

 private:
  struct Impl;
  explicit ProcessModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// sup over r > r0 of j(r)/j(r+delta); isotropic models only.
double j_ratio_sup(const ProcessModel& model, double r0, double delta, std::size_t grid = 2000);

struct PSearchOptions {
  int angular = 32;
  int radial = 64;
  std::uint64_t random_probes = 10000;
  std::uint64_t seed = 20240611;
  double step = 0.95;
};

struct PSearchResult {
  double p = 0.0;
  double worst_ratio = 1.0;  // max over probes of max(ratio, 1/ratio)
  std::uint64_t probes = 0;
};

// Worst two-sided deviation max(ratio, 1/ratio) over the E1 probe set.
PSearchResult e1_worst_ratio(const ProcessModel& model, const Point& z0, double p, double q, double r,
                             const PSearchOptions& opt = {});
PSearchResult e2_worst_ratio(const ProcessModel& model, const Point& z0, double p, double q, double r,
                             const PSearchOptions& opt = {});

// Largest grid p < q/16 with (1+eps)^{-1} < j(z,y)/j(z0,y) < 1+eps on the probe set.
PSearchResult find_p_for_E1(const ProcessModel& model, const Point& z0, double epsilon, double q, double r,
                            const PSearchOptions& opt = {});
// Smallest grid p > 16q with (1+eps)^{-1} < j(z,y)/j(z,z0) < 1+eps on the probe set.
PSearchResult find_p_for_E2(const ProcessModel& model, const Point& z0, double epsilon, double q, double r,
                            const PSearchOptions& opt = {});

struct AsymptoticsReport {
  std::vector<double> r;
  std::vector<double> ratio;  // j(r) r^d / psi0(1/r)
  bool stabilizes = false;
  double spread = 0.0;  // relative spread of the last three ratios
  double tolerance = 0.0;
};

AsymptoticsReport check_j_asymptotics(const ProcessModel& model, const std::vector<double>& r_grid,
                                      double tolerance = 2e-2);

// int (1 ^ |x|^2) j(|x|) dx over R^d.
QuadResult levy_measure_integral(const ProcessModel& model);

// Surface area of the unit sphere S^{d-1} and volume of the unit ball in R^d.
double sphere_area(int d);
double ball_volume(int d);

// Deterministic set of n directions on S^{d-1}.
std::vector<Point> direction_grid(int d, int n);

}  // namespace levypot::kernels
