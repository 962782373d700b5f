#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <string>
#include <vector>

#include "levypot/errors.hpp"

namespace levypot {

inline constexpr int kMaxDim = 8;

// Fixed-capacity point in R^d, d <= kMaxDim. Value type, no allocation.
class Point {
 public:
  Point() = default;
  explicit Point(int d) : d_(check_dim(d)) {}
  Point(std::initializer_list<double> xs) : d_(check_dim(static_cast<int>(xs.size()))) {
    int i = 0;
    for (double v : xs) c_[i++] = v;
  }
  explicit Point(const std::vector<double>& xs) : d_(check_dim(static_cast<int>(xs.size()))) {
    for (int i = 0; i < d_; ++i) c_[i] = xs[i];
  }

  static Point zero(int d) { return Point(d); }
  static Point basis(int d, int axis) {
    Point p(d);
    p[axis] = 1.0;
    return p;
  }
  static Point filled(int d, double v) {
    Point p(d);
    for (int i = 0; i < d; ++i) p[i] = v;
    return p;
  }

  int dim() const { return d_; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  double norm2() const {
    double s = 0.0;
    for (int i = 0; i < d_; ++i) s += c_[i] * c_[i];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }

  std::vector<double> to_vector() const { return {c_.begin(), c_.begin() + d_}; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < d_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < d_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < d_; ++i) c_[i] *= s;
    return *this;
  }

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend bool operator==(const Point& a, const Point& b) {
    if (a.d_ != b.d_) return false;
    for (int i = 0; i < a.d_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

 private:
  static int check_dim(int d) {
    if (d < 1 || d > kMaxDim) throw ParameterError("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    return d;
  }

  std::array<double, kMaxDim> c_{};
  int d_ = 0;
};

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

inline void require_same_dim(const Point& p, int d, const char* what) {
  if (p.dim() != d)
    throw ParameterError(std::string(what) + ": dimension mismatch (got " + std::to_string(p.dim()) + ", expected " +
                         std::to_string(d) + ")");
}

std::string to_string(const Point& p);

}  // namespace levypot
