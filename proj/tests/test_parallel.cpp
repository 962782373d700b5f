#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "levypot/parallel.hpp"

using namespace levypot;

TEST(MomentAccumulator, MatchesTwoPassStatistics) {
  std::vector<double> xs{1.0, 4.0, 2.5, -3.0, 7.25, 0.5};
  std::vector<double> ys{2.0, 1.0, 0.0, 5.0, -1.0, 3.0};
  MomentAccumulator acc(2);
  for (std::size_t i = 0; i < xs.size(); ++i) acc.add(std::vector<double>{xs[i], ys[i]});
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= xs.size();
  double cxx = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cxx += (xs[i] - mx) * (xs[i] - mx);
    cxy += (xs[i] - mx) * (ys[i] - my);
  }
  cxx /= xs.size() - 1;
  cxy /= xs.size() - 1;
  EXPECT_NEAR(acc.mean(0), mx, 1e-14);
  EXPECT_NEAR(acc.mean(1), my, 1e-14);
  EXPECT_NEAR(acc.covariance(0, 0), cxx, 1e-12);
  EXPECT_NEAR(acc.covariance(0, 1), cxy, 1e-12);
  EXPECT_NEAR(acc.estimate(0).std_error, std::sqrt(cxx / xs.size()), 1e-12);
}

TEST(MomentAccumulator, MergeEqualsSinglePass) {
  RngStream r(9, 0);
  MomentAccumulator whole(2), left(2), right(2);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform(), v = u * u + r.normal();
    const std::vector<double> x{u, v};
    whole.add(x);
    (i < 377 ? left : right).add(x);
  }
  left.merge(right);
  EXPECT_EQ(left.count(), whole.count());
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(left.mean(i), whole.mean(i), 1e-13);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(left.covariance(i, j), whole.covariance(i, j), 1e-12);
  }
}

TEST(MomentAccumulator, PerfectlyCorrelatedRatioHasNoError) {
  MomentAccumulator acc(2);
  RngStream r(2, 0);
  for (int i = 0; i < 500; ++i) {
    const double u = 1.0 + r.uniform();
    acc.add(std::vector<double>{3.0 * u, u});
  }
  const Estimate e = acc.ratio(0, 1);
  EXPECT_NEAR(e.value, 3.0, 1e-13);
  EXPECT_LT(e.std_error, 1e-7);
  EXPECT_LT(acc.difference(0, 0).std_error, 1e-12);
}

TEST(RunSamples, ResultIndependentOfWorkerCount) {
  auto run = [](int workers) {
    SamplingPlan plan{10000, 77, 3, workers, 256};
    return run_samples(plan, 2, [](RngStream& rng, std::uint64_t i, std::span<double> out) {
      out[0] = rng.uniform();
      out[1] = out[0] * static_cast<double>(i % 7);
    });
  };
  const MomentAccumulator a = run(1), b = run(4);
  EXPECT_EQ(a.count(), 10000u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a.mean(i), b.mean(i));
    EXPECT_EQ(a.covariance(i, i), b.covariance(i, i));
  }
}

TEST(RunSamples, SeedChangesResult) {
  auto mean = [](std::uint64_t seed) {
    SamplingPlan plan{2048, seed, 0, 1, 1024};
    return run_samples(plan, 1, [](RngStream& rng, std::uint64_t, std::span<double> out) { out[0] = rng.uniform(); })
        .mean(0);
  };
  EXPECT_NE(mean(1), mean(2));
  EXPECT_EQ(mean(1), mean(1));
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(1000, 3, [&](std::uint64_t i) { hits[i].fetch_add(1); });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 2,
                            [](std::uint64_t i) {
                              if (i == 42) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Estimate, ZScoreAndIndependentRatio) {
  const Estimate a{2.0, 0.3, 100, false}, b{1.0, 0.4, 100, false};
  EXPECT_NEAR(z_score(a, b), 1.0 / 0.5, 1e-14);
  const Estimate r = ratio_independent(a, b);
  EXPECT_NEAR(r.value, 2.0, 1e-15);
  EXPECT_NEAR(r.std_error, 2.0 * std::hypot(0.15, 0.4), 1e-14);
}
