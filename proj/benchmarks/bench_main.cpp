#include <benchmark/benchmark.h>

#include "levypot/bernstein.hpp"
#include "levypot/geometry.hpp"
#include "levypot/kernels.hpp"
#include "levypot/simulate.hpp"

using namespace levypot;

static void BM_CenteredExitRadius(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate::centered_exit_radius(1.0, rng));
}
BENCHMARK(BM_CenteredExitRadius);

static void BM_OffCenterBallExit(benchmark::State& state) {
  RngStream rng(2, 0);
  const Point x{0.6, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(simulate::ball_exit_sample(1.0, 2, x, rng));
}
BENCHMARK(BM_OffCenterBallExit);

static void BM_WalkUnitBall(benchmark::State& state) {
  const simulate::StableProcess proc(2, 1.0);
  const auto D = geometry::Domain::ball(Point::zero(2), 1.0);
  RngStream rng(3, 0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate::walk(proc, D, Point{0.3, 0.2}, rng));
}
BENCHMARK(BM_WalkUnitBall);

static void BM_WalkFiniteVolumeHorn(benchmark::State& state) {
  const simulate::StableProcess proc(2, 1.0);
  const auto D = geometry::Domain::fv_horn(2, 3.0);
  RngStream rng(4, 0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate::walk(proc, D, Point{1.3, 0.0}, rng));
}
BENCHMARK(BM_WalkFiniteVolumeHorn);

static void BM_HornInteriorRadius(benchmark::State& state) {
  const auto D = geometry::Domain::horn(2, 3.0, 1.0, 1.0);
  const Point x{0.5, 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(D.interior_radius(x));
}
BENCHMARK(BM_HornInteriorRadius);

static void BM_SubordinateJumpDensity(benchmark::State& state) {
  const auto f = bernstein::make_gamma_subordinator();
  double r = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::subordinate_jump_density(f, 3, r));
    r = r < 10.0 ? r * 1.1 : 0.5;
  }
}
BENCHMARK(BM_SubordinateJumpDensity);

static void BM_TargetStepMass(benchmark::State& state) {
  const simulate::StableProcess proc(2, 1.0);
  const auto A = geometry::parse_domain("diff(ball(0;3),ball(0;2))", 2);
  const auto q = simulate::target_quadrature(A);
  const Point c{0.1, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(simulate::target_step_mass(proc, q, c, 0.5));
}
BENCHMARK(BM_TargetStepMass);
BENCHMARK_MAIN();
