#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace levypot {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

struct QuadTolerance {
  double abs = 1e-10;
  double rel = 1e-8;
};

using RealFn = std::function<double(double)>;

// Double-exponential quadrature on [a, b]; endpoint singularities allowed.
QuadResult integrate(const RealFn& f, double a, double b, QuadTolerance tol = {});

// Double-exponential quadrature on [a, inf).
QuadResult integrate_to_infinity(const RealFn& f, double a, QuadTolerance tol = {});

// Integral over [a, b] split at the given interior points; b may be +inf.
QuadResult integrate_split(const RealFn& f, double a, double b, const std::vector<double>& breaks,
                           QuadTolerance tol = {});

// Fixed-Talbot numerical inversion of a Laplace transform F at t > 0.
double invert_laplace_talbot(const std::function<std::complex<double>(std::complex<double>)>& F, double t,
                             int terms = 32);

// Gauss-Legendre nodes and weights on [a, b].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n, double a, double b);

// Log-spaced grid of n points over [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace levypot
