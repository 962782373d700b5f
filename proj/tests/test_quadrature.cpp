#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "levypot/quadrature.hpp"

using namespace levypot;

constexpr double kPi = std::numbers::pi;

TEST(Integrate, Polynomial) {
  const QuadResult r = integrate([](double x) { return x * x * x - 2.0 * x; }, -1.0, 2.0);
  EXPECT_NEAR(r.value, (16.0 - 1.0) / 4.0 - (4.0 - 1.0), 1e-12);
  EXPECT_GT(r.evaluations, 0u);
}

TEST(Integrate, EndpointSingularity) {
  EXPECT_NEAR(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {1e-14, 1e-12}).value, 2.0, 1e-11);
  // int_0^1 x^{-1/2} (1-x)^{-1/2} dx = pi; 1 - x loses digits near x = 1.
  auto f = [](double x) { return 1.0 / std::sqrt(x * (1.0 - x)); };
  EXPECT_NEAR(integrate(f, 0.0, 1.0).value, kPi, 1e-7);
}

TEST(Integrate, LogSingularity) {
  const QuadResult r = integrate([](double x) { return std::log(x); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, -1.0, 1e-10);
}

TEST(IntegrateToInfinity, ExponentialAndPowerTails) {
  EXPECT_NEAR(integrate_to_infinity([](double x) { return std::exp(-2.0 * x); }, 0.0).value, 0.5, 1e-11);
  EXPECT_NEAR(integrate_to_infinity([](double x) { return 1.0 / (x * x); }, 2.0).value, 0.5, 1e-9);
  EXPECT_NEAR(integrate_to_infinity([](double x) { return 1.0 / (1.0 + x * x); }, 0.0).value, kPi / 2.0, 1e-9);
}

TEST(IntegrateSplit, KinkedIntegrand) {
  const QuadResult r = integrate_split([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, {0.3});
  EXPECT_NEAR(r.value, 0.5 * (0.09 + 0.49), 1e-12);
  const QuadResult t = integrate_split([](double x) { return std::exp(-x); }, 0.0, INFINITY, {1.0, 5.0});
  EXPECT_NEAR(t.value, 1.0, 1e-10);
}

TEST(Talbot, InvertsKnownTransforms) {
  auto F = [](std::complex<double> s) { return 1.0 / (s + 1.0); };
  for (double t : {0.5, 1.0, 3.0}) EXPECT_NEAR(invert_laplace_talbot(F, t), std::exp(-t), 1e-8);
  auto G = [](std::complex<double> s) { return 1.0 / (s * s); };
  EXPECT_NEAR(invert_laplace_talbot(G, 2.0), 2.0, 1e-8);
}

TEST(GaussLegendre, ExactForDegree2nMinus1) {
  const GaussRule g = gauss_legendre(5, 0.0, 2.0);
  ASSERT_EQ(g.nodes.size(), 5u);
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    s += g.weights[i] * std::pow(g.nodes[i], 9);
    w += g.weights[i];
  }
  EXPECT_NEAR(w, 2.0, 1e-14);
  EXPECT_NEAR(s, std::pow(2.0, 10) / 10.0, 1e-10);
}

TEST(LogGrid, EndpointsAndRatio) {
  const auto g = log_grid(1e-2, 1e2, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_NEAR(g.front(), 1e-2, 1e-16);
  EXPECT_NEAR(g.back(), 1e2, 1e-12);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], 10.0, 1e-12);
}
