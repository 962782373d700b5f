#include <gtest/gtest.h>

#include <cmath>

#include "levypot/bernstein.hpp"
#include "levypot/errors.hpp"
#include "levypot/quadrature.hpp"

using namespace levypot;
using namespace levypot::bernstein;

namespace {

// E_{1/2}(-x) = exp(x^2) erfc(x).
double ml_half(double x) { return std::exp(x * x) * std::erfc(x); }

}  // namespace

TEST(Stable, ClosedForms) {
  const auto f = make_stable_subordinator(0.5);
  EXPECT_NEAR(f.phi(4.0), 2.0, 1e-15);
  EXPECT_NEAR(f.phi_prime(4.0), 0.25, 1e-15);
  EXPECT_NEAR(f.mu(4.0), 0.5 * std::pow(4.0, -1.5) / std::tgamma(0.5), 1e-15);
  EXPECT_NEAR(f.u(4.0), std::pow(4.0, -0.5) / std::sqrt(M_PI), 1e-15);
  EXPECT_EQ(f.family(), Family::Stable);
  EXPECT_DOUBLE_EQ(f.index(), 0.5);
}

TEST(Stable, LaplaceExponentFromMu) {
  for (double beta : {0.3, 0.5, 0.8}) {
    const auto f = make_stable_subordinator(beta);
    for (double l : {0.1, 1.0, 25.0}) {
      const QuadResult r = laplace_exponent_from_mu(f, l);
      EXPECT_NEAR(r.value, std::pow(l, beta), 1e-7 * std::pow(l, beta)) << "beta " << beta << " lambda " << l;
    }
  }
}

TEST(Stable, PotentialDensityInvertsPhi) {
  // int e^{-l t} u(t) dt = 1 / phi(l)
  const auto f = make_stable_subordinator(0.4);
  for (double l : {0.5, 2.0}) {
    const double v = integrate_to_infinity([&](double t) { return t > 0 ? std::exp(-l * t) * f.u(t) : 0.0; }, 0.0).value;
    EXPECT_NEAR(v, 1.0 / f.phi(l), 1e-7);
  }
}

TEST(Stable, RejectsBadIndex) {
  EXPECT_THROW(make_stable_subordinator(1.0), ParameterError);
  EXPECT_THROW(make_stable_subordinator(0.0), ParameterError);
}

TEST(Gamma, ClosedForms) {
  const auto f = make_gamma_subordinator();
  EXPECT_NEAR(f.phi(std::exp(1.0) - 1.0), 1.0, 1e-15);
  EXPECT_NEAR(f.mu(2.0), std::exp(-2.0) / 2.0, 1e-16);
  EXPECT_FALSE(f.has_u());
  EXPECT_THROW(f.u(1.0), UnsupportedModelError);
  EXPECT_NEAR(laplace_exponent_from_mu(f, 3.0).value, std::log(4.0), 1e-8);
}

TEST(MittagLeffler, HalfIndexMatchesErfcForm) {
  for (double x : {0.0, 0.1, 0.5, 1.0, 2.0}) EXPECT_NEAR(mittag_leffler_series(0.5, x), ml_half(x), 1e-10) << x;
  EXPECT_NEAR(mittag_leffler_series(1.0, 1.5), std::exp(-1.5), 1e-13);
}

TEST(GeometricStable, LevyDensityMatchesMittagLefflerForm) {
  // alpha = 1: beta = 1/2 and mu(t) = (beta / t) E_beta(-t^beta).
  const auto f = make_geometric_stable_subordinator(1.0);
  for (double t : {0.01, 0.3, 1.0, 4.0, 30.0}) {
    const double expect = 0.5 / t * ml_half(std::sqrt(t));
    EXPECT_NEAR(f.mu(t), expect, 1e-7 * expect) << t;
  }
  EXPECT_NEAR(f.phi(9.0), std::log(4.0), 1e-15);
}

TEST(GeometricStable, LaplaceExponentFromMu) {
  for (double alpha : {0.6, 1.0, 1.6}) {
    const auto f = make_geometric_stable_subordinator(alpha);
    const double l = 2.5;
    EXPECT_NEAR(laplace_exponent_from_mu(f, l).value, std::log1p(std::pow(l, alpha / 2.0)), 1e-6) << alpha;
  }
}

TEST(IteratedGeometric, ComposesGeometricExponents) {
  const auto f = make_iterated_geometric_subordinator(2, 1.0);
  const double l = 3.0;
  const double inner = std::log1p(std::sqrt(l));
  EXPECT_NEAR(f.phi(l), std::log1p(std::sqrt(inner)), 1e-14);
  const double h = 1e-5;
  EXPECT_NEAR(f.phi_prime(l), (f.phi(l + h) - f.phi(l - h)) / (2 * h), 1e-8);
  EXPECT_FALSE(f.has_mu());
}

TEST(Parse, KnownIdsAndErrors) {
  EXPECT_EQ(parse_subordinator("stable:0.5").family(), Family::Stable);
  EXPECT_EQ(parse_subordinator("gamma").family(), Family::Gamma);
  EXPECT_EQ(parse_subordinator("geo:1.0").family(), Family::GeometricStable);
  EXPECT_EQ(parse_subordinator("iter-geo:2:1.0").family(), Family::IteratedGeometric);
  EXPECT_THROW(parse_subordinator("stable:abc"), ParseError);
  EXPECT_THROW(parse_subordinator("cauchy"), ParseError);
  EXPECT_THROW(parse_subordinator("iter-geo:1.5:1.0"), ParseError);
}

TEST(MuUpperBound, HoldsForCompleteBernsteinExamples) {
  const auto grid = log_grid(1e-3, 1e3, 200);
  for (const auto& f : {make_stable_subordinator(0.5), make_gamma_subordinator(), make_geometric_stable_subordinator(1.0)}) {
    const ScalingReport r = check_mu_upper_bound(f, grid);
    EXPECT_TRUE(r.holds) << f.name();
    EXPECT_FALSE(r.witness.has_value());
    EXPECT_EQ(r.grid_points, 200u);
  }
}

TEST(MuUpperBound, InflatedDensityFailsWithWitness) {
  const auto f = make_stable_subordinator(0.5).with_scaled_mu(10.0);
  const ScalingReport r = check_mu_upper_bound(f, log_grid(1e-2, 1e2, 50));
  EXPECT_FALSE(r.holds);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_LT(r.margin, 0.0);
  EXPECT_FALSE(r.grid_note.empty());
}

TEST(MuRatioSup, GammaClosedForm) {
  // mu(t)/mu(t+d) = e^d (t+d)/t is decreasing, so the sup sits at t0.
  const auto f = make_gamma_subordinator();
  const double t0 = 0.5, d = 0.25;
  EXPECT_NEAR(mu_ratio_sup(f, t0, d), std::exp(d) * (t0 + d) / t0, 1e-12);
  EXPECT_EQ(mu_ratio_sup(f, t0, 0.0), 1.0);
}

TEST(ConditionH, StableExponent) {
  const auto f = make_stable_subordinator(0.5);
  ConditionH h;
  h.sigma = 1.0;
  h.delta = 0.5;
  EXPECT_TRUE(check_condition_H(f, 3, h).holds);
  h.delta = 0.7;
  EXPECT_FALSE(check_condition_H(f, 3, h).holds);
}

TEST(ConditionH, LowDimensionNeedsLowerPair) {
  const auto f = make_stable_subordinator(0.75);
  ConditionH h;
  h.sigma = 1.0;
  h.delta = 0.25;
  EXPECT_THROW(check_condition_H(f, 2, h), ParameterError);
  h.sigma_p = 1.0;
  h.delta_p = 0.25;
  EXPECT_TRUE(check_condition_H(f, 2, h).holds);
}

TEST(WeakScaling, StableIsExactlyScaling) {
  const auto f = make_stable_subordinator(0.5);
  EXPECT_TRUE(check_weak_scaling(f, 1.0, 1.0, 0.5, 0.5).holds);
  const ScalingReport r = check_weak_scaling(f, 1.0, 1.0, 0.3, 0.4);
  EXPECT_FALSE(r.holds);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(r.witness->size(), 2u);
  EXPECT_THROW(check_weak_scaling(f, 1.0, 1.0, 0.6, 0.5), ParameterError);
}

TEST(ExponentialLowerBound, Gamma) {
  const auto e = check_mu_exponential_lower_bound(make_gamma_subordinator(), 50.0);
  EXPECT_TRUE(e.holds);
  EXPECT_NEAR(e.c, std::exp(-1.0) / 2.0, 1e-3);
  EXPECT_NEAR(e.c1, std::exp(-1.0), 1e-15);
}

TEST(ExponentialLowerBound, StableHoldsAndZeroDensityFails) {
  EXPECT_TRUE(check_mu_exponential_lower_bound(make_stable_subordinator(0.5)).holds);
  const auto zero = make_stable_subordinator(0.5).with_scaled_mu(0.0);
  EXPECT_FALSE(check_mu_exponential_lower_bound(zero).holds);
}
