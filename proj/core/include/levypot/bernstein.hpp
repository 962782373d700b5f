#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "levypot/quadrature.hpp"

namespace levypot::bernstein {

enum class Family { Stable, Gamma, GeometricStable, IteratedGeometric, Custom };

// Complete Bernstein function of a driftless subordinator: Laplace exponent
// phi, its derivative, Levy density mu and (optionally) potential density u.
class CompleteBernsteinFunction {
 public:
  using Fn = std::function<double(double)>;

  CompleteBernsteinFunction(std::string name, Fn phi, Fn phi_prime, std::optional<Fn> mu, std::optional<Fn> u,
                            Family family = Family::Custom, double index = 0.0);

  double phi(double lambda) const { return phi_(lambda); }
  double phi_prime(double lambda) const { return phi_prime_(lambda); }
  double mu(double t) const;
  double u(double t) const;
  bool has_mu() const { return mu_.has_value(); }
  bool has_u() const { return u_.has_value(); }

  const std::string& name() const { return name_; }
  Family family() const { return family_; }
  // beta for Stable, alpha for GeometricStable / IteratedGeometric.
  double index() const { return index_; }

  // Same phi and u, Levy density multiplied by c (used to construct violations).
  CompleteBernsteinFunction with_scaled_mu(double c) const;

 private:
  std::string name_;
  Fn phi_;
  Fn phi_prime_;
  std::optional<Fn> mu_;
  std::optional<Fn> u_;
  Family family_;
  double index_;
};

CompleteBernsteinFunction make_stable_subordinator(double beta);
CompleteBernsteinFunction make_gamma_subordinator();
CompleteBernsteinFunction make_geometric_stable_subordinator(double alpha);
CompleteBernsteinFunction make_iterated_geometric_subordinator(int n, double alpha);

// Parses "stable:0.5", "gamma", "geo:1.0", "iter-geo:2:1.0".
CompleteBernsteinFunction parse_subordinator(const std::string& id);

// Mittag-Leffler E_beta(-x) by its power series; accurate for moderate x.
double mittag_leffler_series(double beta, double x);

// phi(lambda) recomputed as int (1 - e^{-lambda t}) mu(t) dt.
QuadResult laplace_exponent_from_mu(const CompleteBernsteinFunction& f, double lambda);

struct GridSpec {
  double lo = 1e-3;
  double hi = 1e3;
  std::size_t points = 400;
};

struct ScalingReport {
  bool holds = true;
  // Grid coordinates of the worst violation, present iff holds is false.
  std::optional<std::vector<double>> witness;
  // Minimum relative slack over the grid (negative when violated).
  double margin = 0.0;
  std::size_t grid_points = 0;
  std::string grid_note;
};

// mu(t) <= (1 - 2/e)^{-1} t^{-2} phi'(1/t) at every grid point.
ScalingReport check_mu_upper_bound(const CompleteBernsteinFunction& f, const std::vector<double>& t_grid);

// Grid supremum of mu(t)/mu(t + delta) over t > t0.
double mu_ratio_sup(const CompleteBernsteinFunction& f, double t0, double delta, std::size_t grid_size = 400);

struct ConditionH {
  double sigma = 1.0;
  double delta = 0.5;
  double lambda0 = 1.0;
  std::optional<double> sigma_p;
  std::optional<double> delta_p;
};

// phi'(lambda t)/phi'(lambda) <= sigma t^{-delta} (and >= sigma' t^{-delta'}
// when d <= 2) for t >= 1, lambda >= lambda0 on a log grid.
ScalingReport check_condition_H(const CompleteBernsteinFunction& f, int d, const ConditionH& h,
                                std::size_t grid_size = 64, double grid_hi = 1e6);

// a1 lambda^{d1} phi(t) <= phi(lambda t) <= a2 lambda^{d2} phi(t) for lambda, t >= 1.
ScalingReport check_weak_scaling(const CompleteBernsteinFunction& f, double a1, double a2, double d1, double d2,
                                 std::size_t grid_size = 64, double grid_hi = 1e6);

struct ExponentialLowerBound {
  double c1 = 0.0;
  double c2 = 0.0;
  double c = 0.0;
  bool holds = false;
};

// Estimates c = inf mu(t+1)/mu(t) on [1, T-1] and checks mu(t) >= c1 e^{-c2 t} on [1, T].
ExponentialLowerBound check_mu_exponential_lower_bound(const CompleteBernsteinFunction& f, double T = 50.0,
                                                       std::size_t grid_size = 400);

}  // namespace levypot::bernstein
