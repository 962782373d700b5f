#include "levypot/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "levypot/errors.hpp"

namespace levypot::bernstein {

namespace {

constexpr double kUpperBoundFactor = 1.0 / (1.0 - 2.0 / std::numbers::e);

double parse_number(const std::string& s, const std::string& id) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "' in subordinator id '" + id + "'", id.find(s));
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// t mu(t) for the geometric (alpha/2)-stable subordinator, i.e. the inverse
// Laplace transform of phi'. Series for t^beta <= 1, fixed Talbot otherwise.
double geometric_t_mu(double beta, double t) {
  const double x = std::pow(t, beta);
  if (x <= 1.0) return beta * mittag_leffler_series(beta, x);
  auto F = [beta](std::complex<double> s) {
    const std::complex<double> sb = std::pow(s, beta);
    return beta * sb / (s * (1.0 + sb));
  };
  return invert_laplace_talbot(F, t, 32);
}

}  // namespace

CompleteBernsteinFunction::CompleteBernsteinFunction(std::string name, Fn phi, Fn phi_prime, std::optional<Fn> mu,
                                                     std::optional<Fn> u, Family family, double index)
    : name_(std::move(name)),
      phi_(std::move(phi)),
      phi_prime_(std::move(phi_prime)),
      mu_(std::move(mu)),
      u_(std::move(u)),
      family_(family),
      index_(index) {}

double CompleteBernsteinFunction::mu(double t) const {
  if (!mu_) throw UnsupportedModelError("Levy density unavailable for subordinator '" + name_ + "'");
  return (*mu_)(t);
}

double CompleteBernsteinFunction::u(double t) const {
  if (!u_) throw UnsupportedModelError("potential density unavailable for subordinator '" + name_ + "'");
  return (*u_)(t);
}

CompleteBernsteinFunction CompleteBernsteinFunction::with_scaled_mu(double c) const {
  std::optional<Fn> m;
  if (mu_) {
    Fn base = *mu_;
    m = [base, c](double t) { return c * base(t); };
  }
  return CompleteBernsteinFunction(name_ + "*" + std::to_string(c), phi_, phi_prime_, m, u_, Family::Custom, index_);
}

CompleteBernsteinFunction make_stable_subordinator(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("stable subordinator needs beta in (0,1)");
  const double gm = std::tgamma(1.0 - beta), gb = std::tgamma(beta);
  std::ostringstream name;
  name << "stable:" << beta;
  return CompleteBernsteinFunction(
      name.str(), [beta](double l) { return std::pow(l, beta); },
      [beta](double l) { return beta * std::pow(l, beta - 1.0); },
      [beta, gm](double t) { return beta * std::pow(t, -1.0 - beta) / gm; },
      [beta, gb](double t) { return std::pow(t, beta - 1.0) / gb; }, Family::Stable, beta);
}

CompleteBernsteinFunction make_gamma_subordinator() {
  return CompleteBernsteinFunction(
      "gamma", [](double l) { return std::log1p(l); }, [](double l) { return 1.0 / (1.0 + l); },
      [](double t) { return std::exp(-t) / t; }, std::nullopt, Family::Gamma, 1.0);
}

CompleteBernsteinFunction make_geometric_stable_subordinator(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ParameterError("geometric stable subordinator needs alpha in (0,2]");
  const double beta = alpha / 2.0;
  std::ostringstream name;
  name << "geo:" << alpha;
  return CompleteBernsteinFunction(
      name.str(), [beta](double l) { return std::log1p(std::pow(l, beta)); },
      [beta](double l) {
        const double lb = std::pow(l, beta);
        return beta * lb / (l * (1.0 + lb));
      },
      [beta](double t) { return geometric_t_mu(beta, t) / t; }, std::nullopt, Family::GeometricStable, alpha);
}

CompleteBernsteinFunction make_iterated_geometric_subordinator(int n, double alpha) {
  if (n < 1) throw ParameterError("iterated geometric subordinator needs n >= 1");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ParameterError("iterated geometric subordinator needs alpha in (0,2]");
  if (n == 1) return make_geometric_stable_subordinator(alpha);
  const double beta = alpha / 2.0;
  auto phi1 = [beta](double l) { return std::log1p(std::pow(l, beta)); };
  auto phi1p = [beta](double l) {
    const double lb = std::pow(l, beta);
    return beta * lb / (l * (1.0 + lb));
  };
  auto phi = [=](double l) {
    double v = l;
    for (int k = 0; k < n; ++k) v = phi1(v);
    return v;
  };
  auto phip = [=](double l) {
    double v = l, d = 1.0;
    for (int k = 0; k < n; ++k) {
      d *= phi1p(v);
      v = phi1(v);
    }
    return d;
  };
  std::ostringstream name;
  name << "iter-geo:" << n << ":" << alpha;
  return CompleteBernsteinFunction(name.str(), phi, phip, std::nullopt, std::nullopt, Family::IteratedGeometric,
                                   alpha);
}

CompleteBernsteinFunction parse_subordinator(const std::string& id) {
  const auto parts = split(id, ':');
  const std::string& head = parts[0];
  if (head == "stable" && parts.size() == 2) return make_stable_subordinator(parse_number(parts[1], id));
  if (head == "gamma" && parts.size() == 1) return make_gamma_subordinator();
  if (head == "geo" && parts.size() == 2) return make_geometric_stable_subordinator(parse_number(parts[1], id));
  if (head == "iter-geo" && parts.size() == 3) {
    const double n = parse_number(parts[1], id);
    if (n != std::floor(n)) throw ParseError("iteration count must be an integer in '" + id + "'", id.find(parts[1]));
    return make_iterated_geometric_subordinator(static_cast<int>(n), parse_number(parts[2], id));
  }
  throw ParseError("unknown subordinator id '" + id + "'", 0);
}

double mittag_leffler_series(double beta, double x) {
  double sum = 0.0;
  double power = 1.0;
  for (int k = 0; k < 400; ++k) {
    const double term = power / std::tgamma(beta * k + 1.0);
    sum += term;
    if (!std::isfinite(term)) break;
    if (k > 2 && std::abs(term) < 1e-17 * std::max(1.0, std::abs(sum))) break;
    power *= -x;
  }
  return sum;
}

QuadResult laplace_exponent_from_mu(const CompleteBernsteinFunction& f, double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
  auto integrand = [&](double t) {
    if (t <= 0.0) return 0.0;
    const double m = f.mu(t);
    if (m == 0.0) return 0.0;
    // mu overflows only at subnormal t, where the integrand carries no mass.
    const double v = -std::expm1(-lambda * t) * m;
    return std::isfinite(v) ? v : 0.0;
  };
  const double s = 1.0 / lambda;
  return integrate_split(integrand, 0.0, std::numeric_limits<double>::infinity(), {0.1 * s, s, 10.0 * s},
                         {1e-12, 1e-10});
}

ScalingReport check_mu_upper_bound(const CompleteBernsteinFunction& f, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw ParameterError("t grid must be nonempty");
  ScalingReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  double worst_t = t_grid.front();
  for (double t : t_grid) {
    if (!(t > 0.0)) throw ParameterError("t grid points must be positive");
    const double bound = kUpperBoundFactor * f.phi_prime(1.0 / t) / (t * t);
    const double slack = (bound - f.mu(t)) / bound;
    if (slack < rep.margin) {
      rep.margin = slack;
      worst_t = t;
    }
  }
  rep.grid_points = t_grid.size();
  rep.holds = rep.margin >= 0.0;
  if (!rep.holds) rep.witness = std::vector<double>{worst_t};
  std::ostringstream note;
  note << "verdict relative to " << t_grid.size() << " grid points in [" << *std::min_element(t_grid.begin(), t_grid.end())
       << ", " << *std::max_element(t_grid.begin(), t_grid.end()) << "]";
  rep.grid_note = note.str();
  return rep;
}

double mu_ratio_sup(const CompleteBernsteinFunction& f, double t0, double delta, std::size_t grid_size) {
  if (!(t0 > 0.0)) throw ParameterError("t0 must be positive");
  if (!(delta >= 0.0)) throw ParameterError("delta must be nonnegative");
  if (delta == 0.0) return 1.0;
  // Find where mu(t + delta) is still a normal number.
  double hi = t0 * 1e3;
  while (hi > t0 * 1.01 && !(f.mu(hi + delta) > std::numeric_limits<double>::min() * 1e10)) hi = t0 + 0.5 * (hi - t0);
  const std::size_t n = std::max<std::size_t>(grid_size, 8);
  std::vector<double> ratios;
  ratios.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 * std::pow(hi / t0, static_cast<double>(i) / static_cast<double>(n - 1));
    ratios.push_back(f.mu(t) / f.mu(t + delta));
  }
  const auto top = std::max_element(ratios.begin(), ratios.end());
  // The tail past the grid maximum must be nonincreasing for the grid sup to
  // be the sup (log-convexity of completely monotone densities).
  for (auto it = top; it + 1 != ratios.end(); ++it)
    if (*(it + 1) > *it * (1.0 + 1e-9))
      throw NumericError("mu ratio tail is not monotone on the grid; supremum not controllable");
  if (!std::isfinite(*top)) throw NumericError("mu ratio is not finite on the grid");
  return std::max(1.0, *top);
}

namespace {

void check_h_params(int d, const ConditionH& h) {
  if (d < 1) throw ParameterError("dimension must be positive");
  if (!(h.sigma > 0.0)) throw ParameterError("condition H needs sigma > 0");
  if (!(h.delta > 0.0 && h.delta <= 1.0)) throw ParameterError("condition H needs delta in (0,1]");
  if (!(h.lambda0 > 0.0)) throw ParameterError("condition H needs lambda0 > 0");
  if (d <= 2) {
    if (!h.sigma_p || !h.delta_p) throw ParameterError("condition H in d <= 2 needs sigma' and delta'");
    if (!(d + 2.0 * h.delta - 2.0 > 0.0)) throw ParameterError("condition H in d <= 2 needs d + 2 delta - 2 > 0");
    const double lo = 1.0 - d / 2.0;
    const double hi = std::min(1.0 + d / 2.0, 2.0 * h.delta + (d - 2.0) / 2.0);
    if (!(*h.delta_p > lo && *h.delta_p < hi)) throw ParameterError("delta' outside its admissible window");
    if (!(*h.sigma_p > 0.0)) throw ParameterError("condition H needs sigma' > 0");
  }
}

}  // namespace

ScalingReport check_condition_H(const CompleteBernsteinFunction& f, int d, const ConditionH& h,
                                std::size_t grid_size, double grid_hi) {
  check_h_params(d, h);
  const auto lambdas = log_grid(h.lambda0, std::max(grid_hi, h.lambda0), grid_size);
  const auto ts = log_grid(1.0, grid_hi, grid_size);
  const bool lower = d <= 2;
  ScalingReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  std::vector<double> worst;
  for (double l : lambdas) {
    const double base = f.phi_prime(l);
    for (double t : ts) {
      const double ratio = f.phi_prime(l * t) / base;
      const double up = h.sigma * std::pow(t, -h.delta);
      double slack = (up - ratio) / up;
      if (lower) {
        const double lo = *h.sigma_p * std::pow(t, -*h.delta_p);
        slack = std::min(slack, (ratio - lo) / lo);
      }
      if (slack < rep.margin) {
        rep.margin = slack;
        worst = {l, t};
      }
    }
  }
  rep.grid_points = lambdas.size() * ts.size();
  rep.holds = rep.margin >= -1e-12;
  if (!rep.holds) rep.witness = worst;
  std::ostringstream note;
  note << "verdict relative to a " << grid_size << "x" << grid_size << " log grid, lambda in [" << h.lambda0 << ", "
       << grid_hi << "], t in [1, " << grid_hi << "]";
  rep.grid_note = note.str();
  return rep;
}

ScalingReport check_weak_scaling(const CompleteBernsteinFunction& f, double a1, double a2, double d1, double d2,
                                 std::size_t grid_size, double grid_hi) {
  if (!(d1 > 0.0 && d1 <= d2 && d2 < 1.0)) throw ParameterError("weak scaling needs 0 < d1 <= d2 < 1");
  if (!(a1 > 0.0 && a2 > 0.0)) throw ParameterError("weak scaling needs a1, a2 > 0");
  const auto grid = log_grid(1.0, grid_hi, grid_size);
  ScalingReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  std::vector<double> worst;
  for (double l : grid) {
    for (double t : grid) {
      const double v = f.phi(l * t);
      const double pt = f.phi(t);
      const double lo = a1 * std::pow(l, d1) * pt;
      const double up = a2 * std::pow(l, d2) * pt;
      const double slack = std::min((v - lo) / lo, (up - v) / up);
      if (slack < rep.margin) {
        rep.margin = slack;
        worst = {l, t};
      }
    }
  }
  rep.grid_points = grid.size() * grid.size();
  rep.holds = rep.margin >= -1e-12;
  if (!rep.holds) rep.witness = worst;
  std::ostringstream note;
  note << "verdict relative to a " << grid_size << "x" << grid_size << " log grid over [1, " << grid_hi << "]^2";
  rep.grid_note = note.str();
  return rep;
}

ExponentialLowerBound check_mu_exponential_lower_bound(const CompleteBernsteinFunction& f, double T,
                                                       std::size_t grid_size) {
  if (!(T > 2.0)) throw ParameterError("exponential lower bound needs T > 2");
  ExponentialLowerBound out;
  const auto grid = log_grid(1.0, T - 1.0, grid_size);
  double c = std::numeric_limits<double>::infinity();
  for (double t : grid) {
    const double m = f.mu(t);
    const double r = m > 0.0 ? f.mu(t + 1.0) / m : 0.0;
    c = std::min(c, r);
  }
  out.c = c;
  if (!(c > 0.0) || !std::isfinite(c)) {
    out.holds = false;
    return out;
  }
  out.c2 = -std::log(c);
  out.c1 = f.mu(1.0);
  out.holds = true;
  for (double t : log_grid(1.0, T, grid_size)) {
    if (f.mu(t) < out.c1 * std::exp(-out.c2 * t) * (1.0 - 1e-12)) {
      out.holds = false;
      break;
    }
  }
  return out;
}

}  // namespace levypot::bernstein
