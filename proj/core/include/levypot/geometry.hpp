#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "levypot/point.hpp"
#include "levypot/rng.hpp"

namespace levypot::geometry {

class Node;

// Point drawn from a volume sampler, with importance weight 1/density
// (0 when the draw fell outside the region).
struct VolumeSample {
  Point y;
  double weight = 0.0;
};

// Region {center, r_in < |y - center| < r_out}; r_in = 0 for a ball,
// r_out = inf for a ball complement.
struct Shell {
  Point center;
  double r_in = 0.0;
  double r_out = std::numeric_limits<double>::infinity();
};

// Open subset of R^d given by a tree of primitives and set operations.
// Immutable; copies share the tree.
class Domain {
 public:
  static Domain ball(const Point& center, double radius);
  static Domain ball_complement(const Point& center, double radius);
  // {x : <normal, x> < offset}; the normal is normalized internally.
  static Domain half_space(const Point& normal, double offset);
  // {0 < s < L, |x'| < A s^beta} in the frame with the given tip and axis.
  static Domain horn(int d, double beta, double A, double L);
  static Domain horn(double beta, double A, double L, const Point& tip, const Point& axis);
  // {s > 1, |x'| < s^{-gamma}} in the frame with the given origin and axis.
  static Domain fv_horn(int d, double gamma);
  static Domain fv_horn(double gamma, const Point& origin, const Point& axis);
  static Domain punctured_ball(const Point& center, double radius, const Point& puncture);

  friend Domain unite(const Domain& a, const Domain& b);
  friend Domain intersect(const Domain& a, const Domain& b);
  // a minus the closure of b.
  friend Domain difference(const Domain& a, const Domain& b);

  int dim() const;
  bool bounded() const;
  bool contains(const Point& x) const;
  // Radius of a ball around x inside D, at least kappa * dist(x, dD).
  double interior_radius(const Point& x) const;
  // Interior radius for x in D, otherwise a lower bound on dist(x, D).
  double clearance(const Point& x) const;
  bool on_boundary(const Point& x, double tol = 1e-9) const;
  std::string to_string() const;

  bool has_volume_sampler() const;
  // u in [0,1) drives the primary (radial or axial) coordinate for stratification.
  VolumeSample sample_volume(double u, RngStream& rng) const;
  // Total mass of the proposal used by sample_volume.
  double sampler_volume() const;

  std::optional<Shell> as_shell() const;
  std::optional<std::pair<Point, Point>> bounding_box() const;

 private:
  explicit Domain(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

Domain unite(const Domain& a, const Domain& b);
Domain intersect(const Domain& a, const Domain& b);
Domain difference(const Domain& a, const Domain& b);

// D^p = D minus the closed ball B(z0, p).
Domain truncate_outside(const Domain& D, const Point& z0, double p);
// D_p = D intersected with B(z0, p).
Domain truncate_inside(const Domain& D, const Point& z0, double p);

// Text form, e.g. "ball(0;1)", "ball([0.5,0];2)", "horn(beta=2,A=1,L=1)",
// "fvhorn(gamma=3)", "diff(ball(0;1),ball(0;0.5))", "union(a,b)", "inter(a,b)",
// "ballc(0;1)", "halfspace([0,1];0)", "punctured(0;1;0)".
Domain parse_domain(const std::string& text, int d);

// Safety factor applied to numerically computed horn distances.
inline constexpr double kHornKappa = 1.0 - 1e-6;

}  // namespace levypot::geometry
