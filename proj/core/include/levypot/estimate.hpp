#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace levypot {

// Monte Carlo or quadrature result. For MC, std_error is sample sd / sqrt(n);
// for quadrature it is the reported error bound and n counts evaluations.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  bool diverged = false;
};

inline double z_score(const Estimate& a, const Estimate& b) {
  double s = std::hypot(a.std_error, b.std_error);
  if (s == 0.0) return a.value == b.value ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), a.value - b.value);
  return (a.value - b.value) / s;
}

// Ratio a/b of independent estimates with delta-method standard error.
inline Estimate ratio_independent(const Estimate& a, const Estimate& b) {
  Estimate r;
  r.value = a.value / b.value;
  double ra = a.value != 0.0 ? a.std_error / a.value : 0.0;
  double rb = b.std_error / b.value;
  r.std_error = std::abs(r.value) * std::sqrt(ra * ra + rb * rb);
  if (a.value == 0.0) r.std_error = a.std_error / std::abs(b.value);
  r.n = std::min(a.n, b.n);
  r.diverged = a.diverged || b.diverged;
  return r;
}

}  // namespace levypot
