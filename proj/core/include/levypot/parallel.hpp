#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "levypot/estimate.hpp"
#include "levypot/rng.hpp"

namespace levypot {

// How a Monte Carlo task is split. Sample i belongs to chunk i / chunk_size and
// draws from RngStream(seed, stream_for(tag, chunk)); results are reduced in
// chunk order, so they do not depend on the worker count.
struct SamplingPlan {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t tag = 0;
  int workers = 1;
  std::uint64_t chunk_size = 1024;
};

// Streaming mean / co-moment accumulator (Welford, Chan merge).
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t k = 0) : mean_(k, 0.0), m2_(k * k, 0.0), delta_(k, 0.0) {}

  std::size_t size() const { return mean_.size(); }
  std::uint64_t count() const { return n_; }

  void add(std::span<const double> x) {
    ++n_;
    const std::size_t k = mean_.size();
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < k; ++i) delta_[i] = x[i] - mean_[i];
    for (std::size_t i = 0; i < k; ++i) mean_[i] += delta_[i] * inv;
    for (std::size_t i = 0; i < k; ++i) {
      const double ri = x[i] - mean_[i];
      for (std::size_t j = 0; j < k; ++j) m2_[i * k + j] += delta_[j] * ri;
    }
  }

  void merge(const MomentAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const std::size_t k = mean_.size();
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_), n = na + nb;
    for (std::size_t i = 0; i < k; ++i) delta_[i] = o.mean_[i] - mean_[i];
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) m2_[i * k + j] += o.m2_[i * k + j] + delta_[i] * delta_[j] * na * nb / n;
    for (std::size_t i = 0; i < k; ++i) mean_[i] += delta_[i] * nb / n;
    n_ += o.n_;
  }

  double mean(std::size_t i) const { return mean_[i]; }
  // Sample covariance of components i and j.
  double covariance(std::size_t i, std::size_t j) const {
    return n_ > 1 ? m2_[i * mean_.size() + j] / static_cast<double>(n_ - 1) : 0.0;
  }
  // Covariance of the sample means.
  double mean_covariance(std::size_t i, std::size_t j) const {
    return n_ > 0 ? covariance(i, j) / static_cast<double>(n_) : 0.0;
  }

  Estimate estimate(std::size_t i) const {
    Estimate e;
    e.value = mean_[i];
    e.std_error = std::sqrt(std::max(0.0, mean_covariance(i, i)));
    e.n = n_;
    return e;
  }

  // Ratio of mean i to mean j with delta-method error including covariance.
  Estimate ratio(std::size_t i, std::size_t j) const {
    Estimate e;
    const double a = mean_[i], b = mean_[j];
    e.value = a / b;
    const double var = (mean_covariance(i, i) - 2.0 * e.value * mean_covariance(i, j) +
                        e.value * e.value * mean_covariance(j, j)) /
                       (b * b);
    e.std_error = std::sqrt(std::max(0.0, var));
    e.n = n_;
    return e;
  }

  // Difference of means i - j including covariance.
  Estimate difference(std::size_t i, std::size_t j) const {
    Estimate e;
    e.value = mean_[i] - mean_[j];
    e.std_error =
        std::sqrt(std::max(0.0, mean_covariance(i, i) + mean_covariance(j, j) - 2.0 * mean_covariance(i, j)));
    e.n = n_;
    return e;
  }

 private:
  std::uint64_t n_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
  std::vector<double> delta_;
};

// Runs fn(index) for index in [0, count) on `workers` threads; fn must write
// only to storage owned by its index.
template <class Fn>
void parallel_for(std::uint64_t count, int workers, Fn&& fn) {
  const int w = static_cast<int>(std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::max(workers, 1)), 1, std::max<std::uint64_t>(count, 1)));
  if (w <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Monte Carlo driver: fn(RngStream&, sample_index, std::span<double> out)
// fills k outputs per sample.
template <class Fn>
MomentAccumulator run_samples(const SamplingPlan& plan, std::size_t k, Fn&& fn) {
  const std::uint64_t chunk = std::max<std::uint64_t>(plan.chunk_size, 1);
  const std::uint64_t chunks = (plan.n + chunk - 1) / chunk;
  std::vector<MomentAccumulator> partial(chunks, MomentAccumulator(k));
  parallel_for(chunks, plan.workers, [&](std::uint64_t c) {
    RngStream rng(plan.seed, stream_for(plan.tag, c));
    std::vector<double> out(k);
    const std::uint64_t lo = c * chunk, hi = std::min(plan.n, lo + chunk);
    for (std::uint64_t i = lo; i < hi; ++i) {
      std::fill(out.begin(), out.end(), 0.0);
      fn(rng, i, std::span<double>(out));
      partial[c].add(out);
    }
  });
  MomentAccumulator total(k);
  for (const auto& p : partial) total.merge(p);
  return total;
}

// Collects one value per sample, in sample order.
template <class T, class Fn>
std::vector<T> generate_samples(const SamplingPlan& plan, Fn&& fn) {
  const std::uint64_t chunk = std::max<std::uint64_t>(plan.chunk_size, 1);
  const std::uint64_t chunks = (plan.n + chunk - 1) / chunk;
  std::vector<T> out(plan.n);
  parallel_for(chunks, plan.workers, [&](std::uint64_t c) {
    RngStream rng(plan.seed, stream_for(plan.tag, c));
    const std::uint64_t lo = c * chunk, hi = std::min(plan.n, lo + chunk);
    for (std::uint64_t i = lo; i < hi; ++i) out[i] = fn(rng, i);
  });
  return out;
}

}  // namespace levypot
