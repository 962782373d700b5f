#include "levypot/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levypot/errors.hpp"

namespace levypot {

namespace {

void check_result(const QuadResult& r, QuadTolerance tol, const char* where) {
  if (!std::isfinite(r.value)) {
    std::ostringstream os;
    os << where << ": non-finite integral after " << r.evaluations << " evaluations";
    throw NumericError(os.str());
  }
  // The engines report the last level difference, which overstates the error
  // once the double-exponential rule has converged.
  const double target = std::max(tol.abs, tol.rel * std::abs(r.value));
  if (r.error > 1e3 * target && r.error > 1e-4 * std::abs(r.value)) {
    std::ostringstream os;
    os << where << ": quadrature did not converge (value " << r.value << ", error estimate " << r.error << ", "
       << r.evaluations << " evaluations)";
    throw NumericError(os.str());
  }
}

}  // namespace

namespace {

QuadResult tanh_sinh_raw(const RealFn& f, double a, double b, QuadTolerance tol) {
  QuadResult r;
  if (a == b) return r;
  std::size_t count = 0;
  auto g = [&](double x) {
    ++count;
    return f(x);
  };
  thread_local boost::math::quadrature::tanh_sinh<double> engine(15);
  double err = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  try {
    r.value = engine.integrate(g, a, b, tol.rel, &err, &l1, &levels);
  } catch (const std::exception& e) {
    throw NumericError(std::string("tanh-sinh quadrature failed: ") + e.what());
  }
  r.error = err;
  r.evaluations = count;
  return r;
}

QuadResult exp_sinh_raw(const RealFn& f, double a, QuadTolerance tol) {
  QuadResult r;
  std::size_t count = 0;
  auto g = [&](double x) {
    ++count;
    return f(a + x);
  };
  thread_local boost::math::quadrature::exp_sinh<double> engine(12);
  double err = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  try {
    r.value = engine.integrate(g, tol.rel, &err, &l1, &levels);
  } catch (const std::exception& e) {
    throw NumericError(std::string("exp-sinh quadrature failed: ") + e.what());
  }
  r.error = err;
  r.evaluations = count;
  return r;
}

}  // namespace

QuadResult integrate(const RealFn& f, double a, double b, QuadTolerance tol) {
  QuadResult r = tanh_sinh_raw(f, a, b, tol);
  check_result(r, tol, "integrate");
  return r;
}

QuadResult integrate_to_infinity(const RealFn& f, double a, QuadTolerance tol) {
  QuadResult r = exp_sinh_raw(f, a, tol);
  check_result(r, tol, "integrate_to_infinity");
  return r;
}

QuadResult integrate_split(const RealFn& f, double a, double b, const std::vector<double>& breaks,
                           QuadTolerance tol) {
  std::vector<double> pts{a};
  for (double p : breaks)
    if (p > a && p < b) pts.push_back(p);
  std::sort(pts.begin() + 1, pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  QuadResult total;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double lo = pts[i];
    const double hi = i + 1 < pts.size() ? pts[i + 1] : b;
    QuadResult part = std::isinf(hi) ? exp_sinh_raw(f, lo, tol) : tanh_sinh_raw(f, lo, hi, tol);
    total.value += part.value;
    total.error += part.error;
    total.evaluations += part.evaluations;
  }
  // Pieces far below the total may stop short of their own relative target.
  check_result(total, tol, "integrate_split");
  return total;
}

double invert_laplace_talbot(const std::function<std::complex<double>(std::complex<double>)>& F, double t,
                             int terms) {
  if (!(t > 0.0)) throw ParameterError("Talbot inversion requires t > 0");
  const int m = terms;
  const double r = 2.0 * m / (5.0 * t);
  double acc = 0.5 * std::real(F(std::complex<double>(r, 0.0))) * std::exp(r * t);
  for (int k = 1; k < m; ++k) {
    const double theta = k * std::numbers::pi / m;
    const double cot = std::cos(theta) / std::sin(theta);
    const std::complex<double> s(r * theta * cot, r * theta);
    const double sigma = theta + (theta * cot - 1.0) * cot;
    acc += std::real(std::exp(t * s) * F(s) * std::complex<double>(1.0, sigma));
  }
  return r / m * acc;
}

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ParameterError("Gauss-Legendre rule needs n >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[n - 1 - i] = w * half;
  }
  return rule;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw ParameterError("log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace levypot
