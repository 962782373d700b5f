#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "levypot/point.hpp"

namespace levypot {

// Philox4x32-10 block function (Salmon et al. counter-based generator).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Counter-based stream: key = seed, counter = (draw index, stream id).
// Streams with different ids never overlap. Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 0) refill();
    std::uint64_t v = buffer_[lane_];
    lane_ = (lane_ + 1) & 1u;
    return v;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }
  double exponential() { return -std::log(uniform()); }
  double normal() { return normal_(*this); }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(*this); }
  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  // Uniform direction on the unit sphere S^{d-1}.
  Point direction(int d) {
    Point p(d);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (int i = 0; i < d; ++i) {
        p[i] = normal();
        n2 += p[i] * p[i];
      }
    } while (n2 == 0.0);
    return p * (1.0 / std::sqrt(n2));
  }

 private:
  void refill() {
    std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                     static_cast<std::uint32_t>(stream_id_),
                                     static_cast<std::uint32_t>(stream_id_ >> 32)};
    std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    auto out = philox4x32_10(ctr, key);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    ++block_;
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  unsigned lane_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Stream id for chunk `chunk` of a sampling task tagged `tag`.
inline std::uint64_t stream_for(std::uint64_t tag, std::uint64_t chunk) { return (tag << 28) ^ chunk; }

}  // namespace levypot
