#include <gtest/gtest.h>

#include <cmath>

#include "levypot/errors.hpp"
#include "levypot/geometry.hpp"
#include "oracles.hpp"

using namespace levypot;
using namespace levypot::geometry;

namespace {

// Stratified MC volume from the domain's sampler, with its standard error.
std::pair<double, double> mc_volume(const Domain& D, int n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = D.sample_volume((i + rng.uniform()) / n, rng).weight;
    s += w;
    s2 += w * w;
  }
  const double m = s / n;
  return {m, std::sqrt(std::max(0.0, s2 / n - m * m) / n)};
}

// Every probe of the interior ball lies in D.
void expect_interior_ball(const Domain& D, const Point& x, RngStream& rng) {
  const double rho = D.interior_radius(x);
  ASSERT_GT(rho, 0.0);
  for (int i = 0; i < 200; ++i) {
    const Point y = x + rng.direction(x.dim()) * (rho * std::pow(rng.uniform(), 1.0 / x.dim()) * (1.0 - 1e-12));
    ASSERT_TRUE(D.contains(y)) << D.to_string() << " x " << to_string(x) << " rho " << rho;
  }
}

}  // namespace

TEST(Ball, ContainsAndRadius) {
  const Domain B = Domain::ball(Point{1.0, 0.0}, 2.0);
  EXPECT_TRUE(B.contains(Point{2.5, 0.0}));
  EXPECT_FALSE(B.contains(Point{3.0, 0.0}));
  EXPECT_NEAR(B.interior_radius(Point{2.5, 0.0}), 0.5, 1e-15);
  EXPECT_NEAR(B.clearance(Point{4.0, 0.0}), 1.0, 1e-15);
  EXPECT_TRUE(B.bounded());
  EXPECT_TRUE(B.on_boundary(Point{1.0, 2.0}));
}

TEST(Horn, InteriorBallsStayInside) {
  RngStream rng(11, 0);
  const Domain H = Domain::horn(2, 3.0, 1.0, 1.0);
  for (Point x : {Point{0.5, 0.0}, Point{0.1, 0.0005}, Point{0.9, -0.6}, Point{0.02, 0.0}})
    if (H.contains(x)) expect_interior_ball(H, x, rng);
  const Domain F = Domain::fv_horn(2, 3.0);
  for (Point x : {Point{1.5, 0.0}, Point{4.0, 0.01}, Point{64.0, 0.0}, Point{1.01, 0.9}})
    if (F.contains(x)) expect_interior_ball(F, x, rng);
}

TEST(Horn, ShapeAndBounds) {
  const Domain H = Domain::horn(2, 2.0, 1.0, 1.0);
  EXPECT_TRUE(H.contains(Point{0.5, 0.2}));
  EXPECT_FALSE(H.contains(Point{0.5, 0.3}));
  EXPECT_FALSE(H.contains(Point{1.1, 0.0}));
  EXPECT_TRUE(H.bounded());
  const Domain F = Domain::fv_horn(2, 3.0);
  EXPECT_FALSE(F.bounded());
  EXPECT_TRUE(F.contains(Point{2.0, 0.1}));
  EXPECT_FALSE(F.contains(Point{2.0, 0.13}));
  EXPECT_FALSE(F.bounding_box().has_value());
}

TEST(Csg, SetOperations) {
  const Domain a = Domain::ball(Point{0.0, 0.0}, 1.0);
  const Domain b = Domain::ball(Point{1.0, 0.0}, 1.0);
  const Point mid{0.5, 0.0}, left{-0.5, 0.0}, right{1.5, 0.0};
  EXPECT_TRUE(unite(a, b).contains(right));
  EXPECT_TRUE(intersect(a, b).contains(mid));
  EXPECT_FALSE(intersect(a, b).contains(left));
  EXPECT_TRUE(difference(a, b).contains(left));
  EXPECT_FALSE(difference(a, b).contains(mid));
  RngStream rng(4, 0);
  expect_interior_ball(difference(a, b), Point{-0.2, 0.3}, rng);
  expect_interior_ball(unite(a, b), Point{0.5, 0.7}, rng);
}

TEST(Csg, PuncturedBallAndHalfSpace) {
  const Domain P = Domain::punctured_ball(Point{0.0, 0.0}, 1.0, Point{0.0, 0.0});
  EXPECT_FALSE(P.contains(Point{0.0, 0.0}));
  EXPECT_NEAR(P.interior_radius(Point{0.3, 0.0}), 0.3, 1e-15);
  const Domain H = Domain::half_space(Point{0.0, 2.0}, 1.0);
  EXPECT_TRUE(H.contains(Point{5.0, 0.9}));
  EXPECT_FALSE(H.contains(Point{5.0, 1.1}));
  EXPECT_NEAR(H.interior_radius(Point{0.0, 0.25}), 0.75, 1e-15);
}

TEST(Truncation, InsideAndOutside) {
  const Domain F = Domain::fv_horn(2, 3.0);
  const Domain out = truncate_outside(F, Point{0.0, 0.0}, 2.0);
  EXPECT_FALSE(out.contains(Point{1.5, 0.0}));
  EXPECT_TRUE(out.contains(Point{2.5, 0.0}));
  const Domain H = Domain::horn(2, 3.0, 1.0, 1.0);
  const Domain in = truncate_inside(H, Point{0.0, 0.0}, 0.5);
  EXPECT_TRUE(in.contains(Point{0.4, 0.0}));
  EXPECT_FALSE(in.contains(Point{0.6, 0.0}));
}

TEST(Volume, SamplersMatchClosedForms) {
  const double pi = oracle::pi;
  struct Case {
    Domain D;
    double volume;
  };
  const Case cases[] = {
      {Domain::ball(Point{0.0, 0.0}, 1.0), pi},
      {difference(Domain::ball(Point{0.0, 0.0}, 1.0), Domain::ball(Point{0.0, 0.0}, 0.5)), 0.75 * pi},
      {Domain::horn(2, 3.0, 1.0, 1.0), 2.0 / 4.0},
      {Domain::fv_horn(2, 3.0), 2.0 / 2.0},
      {Domain::ball(Point{0.0, 0.0, 0.0}, 1.0), 4.0 * pi / 3.0},
      {intersect(Domain::ball(Point{0.0, 0.0}, 1.0), Domain::half_space(Point{0.0, 1.0}, 0.0)), 0.5 * pi},
  };
  std::uint64_t seed = 1;
  for (const auto& c : cases) {
    ASSERT_TRUE(c.D.has_volume_sampler()) << c.D.to_string();
    const auto [v, se] = mc_volume(c.D, 100000, seed++);
    EXPECT_NEAR(v, c.volume, 4.0 * se + 1e-12) << c.D.to_string();
  }
}

TEST(Parse, RoundTripThroughText) {
  const char* texts[] = {"ball(0;1)", "ball([0.5,0];2)", "horn(beta=2,A=1,L=1)", "fvhorn(gamma=3)",
                         "diff(ball(0;1),ball(0;0.5))", "union(ball(0;1),ball([2,0];1))",
                         "inter(horn(beta=3,A=1,L=1),ball(0;0.5))", "ballc(0;1)", "halfspace([0,1];0)",
                         "punctured(0;1;0)"};
  const Point probes[] = {Point{0.3, 0.1}, Point{0.9, 0.0}, Point{1.5, 0.05}, Point{-0.2, 0.7}, Point{2.2, 0.3}};
  for (const char* t : texts) {
    const Domain D = parse_domain(t, 2);
    const Domain again = parse_domain(D.to_string(), 2);
    for (const Point& p : probes) EXPECT_EQ(D.contains(p), again.contains(p)) << t;
  }
}

TEST(Parse, ErrorsCarryOffsets) {
  try {
    parse_domain("ball(0;1", 2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 8u);
  }
  try {
    parse_domain("diff(ball(0;1),cube(0;1))", 2);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 15u);
  }
  EXPECT_THROW(parse_domain("ball([0,0,0];1)", 2), Error);
}

TEST(Shell, RecognizedForAnnuli) {
  const auto s = parse_domain("diff(ball(0;3),ball(0;2))", 2).as_shell();
  ASSERT_TRUE(s.has_value());
  EXPECT_DOUBLE_EQ(s->r_in, 2.0);
  EXPECT_DOUBLE_EQ(s->r_out, 3.0);
  EXPECT_FALSE(parse_domain("horn(beta=2,A=1,L=1)", 2).as_shell().has_value());
}

TEST(BoundingBox, IntersectionShrinks) {
  const auto b = parse_domain("inter(horn(beta=3,A=1,L=1),ball(0;0.5))", 2).bounding_box();
  ASSERT_TRUE(b.has_value());
  EXPECT_LE(b->second[0], 0.5 + 1e-15);
  EXPECT_GE(b->first[0], -0.5 - 1e-15);
}
