#include "levypot/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "levypot/errors.hpp"
#include "levypot/format.hpp"
#include "levypot/kernels.hpp"

namespace levypot::geometry {

using Box = std::pair<Point, Point>;

class Node {
 public:
  explicit Node(int d) : d_(d) {}
  virtual ~Node() = default;
  int dim() const { return d_; }

  virtual bool contains(const Point& x) const = 0;
  virtual double inside_clearance(const Point& x) const = 0;
  virtual double outside_clearance(const Point& x) const = 0;
  virtual bool bounded() const = 0;
  virtual std::string text() const = 0;

  virtual std::optional<double> proposal_volume() const { return std::nullopt; }
  virtual VolumeSample sample(double, RngStream&) const { throw GeometryError("no volume sampler for " + text()); }
  virtual std::optional<Shell> shell() const { return std::nullopt; }
  virtual std::optional<Box> box() const { return std::nullopt; }

  double clearance(const Point& x) const { return contains(x) ? inside_clearance(x) : outside_clearance(x); }

 private:
  int d_;
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Point uniform_in_ball(int d, double radius_fraction, RngStream& rng) { return rng.direction(d) * radius_fraction; }

Box ball_box(const Point& c, double r) {
  Point lo = c, hi = c;
  for (int i = 0; i < c.dim(); ++i) {
    lo[i] -= r;
    hi[i] += r;
  }
  return {lo, hi};
}

class BallNode final : public Node {
 public:
  BallNode(Point c, double r) : Node(c.dim()), c_(c), r_(r) {}
  bool contains(const Point& x) const override { return (x - c_).norm2() < r_ * r_; }
  double inside_clearance(const Point& x) const override { return std::max(0.0, r_ - distance(x, c_)); }
  double outside_clearance(const Point& x) const override { return std::max(0.0, distance(x, c_) - r_); }
  bool bounded() const override { return true; }
  std::string text() const override { return "ball(" + to_string(c_) + ";" + format_double(r_) + ")"; }
  std::optional<double> proposal_volume() const override { return kernels::ball_volume(dim()) * std::pow(r_, dim()); }
  VolumeSample sample(double u, RngStream& rng) const override {
    const Point y = c_ + uniform_in_ball(dim(), r_ * std::pow(u, 1.0 / dim()), rng);
    return {y, contains(y) ? *proposal_volume() : 0.0};
  }
  std::optional<Shell> shell() const override { return Shell{c_, 0.0, r_}; }
  std::optional<Box> box() const override { return ball_box(c_, r_); }

 private:
  Point c_;
  double r_;
};

class BallComplementNode final : public Node {
 public:
  BallComplementNode(Point c, double r) : Node(c.dim()), c_(c), r_(r) {}
  bool contains(const Point& x) const override { return (x - c_).norm2() > r_ * r_; }
  double inside_clearance(const Point& x) const override { return std::max(0.0, distance(x, c_) - r_); }
  double outside_clearance(const Point& x) const override { return std::max(0.0, r_ - distance(x, c_)); }
  bool bounded() const override { return false; }
  std::string text() const override { return "ballc(" + to_string(c_) + ";" + format_double(r_) + ")"; }
  std::optional<Shell> shell() const override { return Shell{c_, r_, kInf}; }

 private:
  Point c_;
  double r_;
};

class HalfSpaceNode final : public Node {
 public:
  HalfSpaceNode(Point n, double offset) : Node(n.dim()), n_(n), offset_(offset) {}
  bool contains(const Point& x) const override { return dot(n_, x) < offset_; }
  double inside_clearance(const Point& x) const override { return std::max(0.0, offset_ - dot(n_, x)); }
  double outside_clearance(const Point& x) const override { return std::max(0.0, dot(n_, x) - offset_); }
  bool bounded() const override { return false; }
  std::string text() const override { return "halfspace(" + to_string(n_) + ";" + format_double(offset_) + ")"; }

 private:
  Point n_;
  double offset_;
};

class PuncturedBallNode final : public Node {
 public:
  PuncturedBallNode(Point c, double r, Point p) : Node(c.dim()), c_(c), r_(r), p_(p) {}
  bool contains(const Point& x) const override { return (x - c_).norm2() < r_ * r_ && !(x == p_); }
  double inside_clearance(const Point& x) const override {
    return std::max(0.0, std::min(r_ - distance(x, c_), distance(x, p_)));
  }
  double outside_clearance(const Point& x) const override {
    if (x == p_) return 0.0;
    return std::max(0.0, distance(x, c_) - r_);
  }
  bool bounded() const override { return true; }
  std::string text() const override {
    return "punctured(" + to_string(c_) + ";" + format_double(r_) + ";" + to_string(p_) + ")";
  }
  std::optional<double> proposal_volume() const override { return kernels::ball_volume(dim()) * std::pow(r_, dim()); }
  VolumeSample sample(double u, RngStream& rng) const override {
    const Point y = c_ + uniform_in_ball(dim(), r_ * std::pow(u, 1.0 / dim()), rng);
    return {y, contains(y) ? *proposal_volume() : 0.0};
  }
  std::optional<Box> box() const override { return ball_box(c_, r_); }

 private:
  Point c_;
  double r_;
  Point p_;
};

// Region of revolution {s_lo < s < s_hi, |x'| < h(s)} around an axis.
class AxialNode : public Node {
 public:
  AxialNode(Point origin, Point axis) : Node(origin.dim()), origin_(origin), axis_(axis) {
    if (dim() < 2) throw ParameterError("horn domains need d >= 2");
    // Orthonormal basis of the complement of the axis.
    for (int i = 0; i < dim() && static_cast<int>(perp_.size()) < dim() - 1; ++i) {
      Point v = Point::basis(dim(), i);
      v -= axis_ * dot(v, axis_);
      for (const Point& q : perp_) v -= q * dot(v, q);
      const double n = v.norm();
      if (n > 1e-8) perp_.push_back(v * (1.0 / n));
    }
  }

  virtual double h(double s) const = 0;
  virtual double s_lo() const = 0;
  virtual double s_hi() const = 0;

  void local(const Point& x, double& s, double& rho) const {
    const Point v = x - origin_;
    s = dot(v, axis_);
    rho = (v - axis_ * s).norm();
  }

  bool contains(const Point& x) const override {
    double s, rho;
    local(x, s, rho);
    return s > s_lo() && s < s_hi() && rho < h(s);
  }
  double inside_clearance(const Point& x) const override { return kHornKappa * boundary_distance(x); }
  double outside_clearance(const Point& x) const override { return kHornKappa * boundary_distance(x); }

  double boundary_distance(const Point& x) const {
    double s0, r0;
    local(x, s0, r0);
    const double lo = s_lo(), hi = s_hi();
    auto cap = [&](double c) {
      const double H = h(c);
      const double dr = r0 > H ? r0 - H : 0.0;
      return std::hypot(s0 - c, dr);
    };
    double best = cap(lo);
    if (std::isfinite(hi)) best = std::min(best, cap(hi));
    if (s0 >= lo && s0 <= hi) best = std::min(best, std::abs(h(s0) - r0));
    // The closest curve point lies within |s - s0| <= best.
    const double a = std::max(lo, s0 - best), b = std::min(hi, s0 + best);
    if (a < b) {
      auto q = [&](double s) {
        const double ds = s - s0, dr = h(s) - r0;
        return ds * ds + dr * dr;
      };
      constexpr int kGrid = 48;
      double bs = a, bq = q(a);
      std::vector<double> ss(kGrid + 1);
      for (int i = 0; i <= kGrid; ++i) {
        ss[i] = a + (b - a) * i / kGrid;
        const double v = q(ss[i]);
        if (v < bq) {
          bq = v;
          bs = ss[i];
        }
      }
      const int i = static_cast<int>(std::lround((bs - a) / (b - a) * kGrid));
      const double la = ss[std::max(0, i - 1)], lb = ss[std::min(kGrid, i + 1)];
      auto res = boost::math::tools::brent_find_minima(q, la, lb, 52);
      bq = std::min(bq, res.second);
      best = std::min(best, std::sqrt(bq));
    }
    return best;
  }

  // Local (s, unit-ball sample) to ambient coordinates.
  Point ambient(double s, double radius, RngStream& rng) const {
    Point x = origin_ + axis_ * s;
    const int m = dim() - 1;
    const Point w = rng.direction(m) * (radius * std::pow(rng.uniform(), 1.0 / m));
    for (int i = 0; i < m; ++i) x += perp_[i] * w[i];
    return x;
  }

 protected:
  std::string frame_text(const Point& default_origin) const {
    std::string t;
    if (!(origin_ == default_origin)) t += ",tip=" + to_string(origin_);
    if (!(axis_ == Point::basis(dim(), 0))) t += ",axis=" + to_string(axis_);
    return t;
  }
  Point origin_;
  Point axis_;
  std::vector<Point> perp_;
};

class HornNode final : public AxialNode {
 public:
  HornNode(double beta, double A, double L, Point tip, Point axis)
      : AxialNode(tip, axis), beta_(beta), A_(A), L_(L), integer_beta_(beta == std::floor(beta) && beta <= 8) {}
  double h(double s) const override {
    if (s <= 0.0) return 0.0;
    if (integer_beta_) {
      double v = A_;
      for (int k = 0; k < static_cast<int>(beta_); ++k) v *= s;
      return v;
    }
    return A_ * std::pow(s, beta_);
  }
  double s_lo() const override { return 0.0; }
  double s_hi() const override { return L_; }
  bool bounded() const override { return true; }
  std::string text() const override {
    std::string t = "horn(beta=" + format_double(beta_) + ",A=" + format_double(A_) + ",L=" + format_double(L_);
    t += frame_text(Point::zero(dim()));
    return t + ")";
  }
  std::optional<double> proposal_volume() const override {
    const double k = beta_ * (dim() - 1) + 1.0;
    return kernels::ball_volume(dim() - 1) * std::pow(A_, dim() - 1) * std::pow(L_, k) / k;
  }
  VolumeSample sample(double u, RngStream& rng) const override {
    const double k = beta_ * (dim() - 1) + 1.0;
    const double s = L_ * std::pow(u, 1.0 / k);
    const Point y = ambient(s, h(s), rng);
    return {y, contains(y) ? *proposal_volume() : 0.0};
  }
  std::optional<Box> box() const override {
    const double H = h(L_);
    Point lo = origin_, hi = origin_;
    for (int i = 0; i < dim(); ++i) {
      const double e0 = origin_[i], e1 = origin_[i] + axis_[i] * L_;
      lo[i] = std::min(e0, e1) - H;
      hi[i] = std::max(e0, e1) + H;
    }
    return Box{lo, hi};
  }

 private:
  double beta_, A_, L_;
  bool integer_beta_;
};

class FvHornNode final : public AxialNode {
 public:
  FvHornNode(double gamma, Point origin, Point axis) : AxialNode(origin, axis), gamma_(gamma) {}
  double h(double s) const override { return s <= 0.0 ? kInf : std::pow(s, -gamma_); }
  double s_lo() const override { return 1.0; }
  double s_hi() const override { return kInf; }
  bool bounded() const override { return false; }
  std::string text() const override {
    return "fvhorn(gamma=" + format_double(gamma_) + frame_text(Point::zero(dim())) + ")";
  }
  std::optional<double> proposal_volume() const override {
    const double k = gamma_ * (dim() - 1) - 1.0;
    if (!(k > 0.0)) return std::nullopt;
    return kernels::ball_volume(dim() - 1) / k;
  }
  VolumeSample sample(double u, RngStream& rng) const override {
    const double k = gamma_ * (dim() - 1) - 1.0;
    if (!(k > 0.0)) throw GeometryError("finite-volume horn needs gamma (d-1) > 1 for volume sampling");
    const double s = std::pow(1.0 - u, -1.0 / k);
    const Point y = ambient(s, h(s), rng);
    return {y, contains(y) ? *proposal_volume() : 0.0};
  }

 private:
  double gamma_;
};

using NodePtr = std::shared_ptr<const Node>;

// Sampler shared by intersections and differences: the smallest sampled
// child proposes, the whole node accepts.
std::optional<std::pair<const Node*, double>> pick_sampler(const std::vector<NodePtr>& kids) {
  std::optional<std::pair<const Node*, double>> best;
  for (const auto& k : kids) {
    auto v = k->proposal_volume();
    if (v && (!best || *v < best->second)) best = std::make_pair(k.get(), *v);
  }
  return best;
}

class UnionNode final : public Node {
 public:
  explicit UnionNode(std::vector<NodePtr> k) : Node(k.front()->dim()), kids_(std::move(k)) {}
  bool contains(const Point& x) const override {
    return std::any_of(kids_.begin(), kids_.end(), [&](const NodePtr& k) { return k->contains(x); });
  }
  double inside_clearance(const Point& x) const override {
    double r = 0.0;
    for (const auto& k : kids_)
      if (k->contains(x)) r = std::max(r, k->inside_clearance(x));
    return r;
  }
  double outside_clearance(const Point& x) const override {
    double r = kInf;
    for (const auto& k : kids_) r = std::min(r, k->outside_clearance(x));
    return r;
  }
  bool bounded() const override {
    return std::all_of(kids_.begin(), kids_.end(), [](const NodePtr& k) { return k->bounded(); });
  }
  std::string text() const override {
    std::string t = "union(";
    for (std::size_t i = 0; i < kids_.size(); ++i) t += (i ? "," : "") + kids_[i]->text();
    return t + ")";
  }
  std::optional<Box> box() const override {
    std::optional<Box> b;
    for (const auto& k : kids_) {
      auto kb = k->box();
      if (!kb) return std::nullopt;
      if (!b) {
        b = kb;
        continue;
      }
      for (int i = 0; i < dim(); ++i) {
        b->first[i] = std::min(b->first[i], kb->first[i]);
        b->second[i] = std::max(b->second[i], kb->second[i]);
      }
    }
    return b;
  }

 private:
  std::vector<NodePtr> kids_;
};

class IntersectNode final : public Node {
 public:
  explicit IntersectNode(std::vector<NodePtr> k) : Node(k.front()->dim()), kids_(std::move(k)) {}
  bool contains(const Point& x) const override {
    return std::all_of(kids_.begin(), kids_.end(), [&](const NodePtr& k) { return k->contains(x); });
  }
  double inside_clearance(const Point& x) const override {
    double r = kInf;
    for (const auto& k : kids_) r = std::min(r, k->inside_clearance(x));
    return r;
  }
  double outside_clearance(const Point& x) const override {
    double r = 0.0;
    for (const auto& k : kids_)
      if (!k->contains(x)) r = std::max(r, k->outside_clearance(x));
    return r;
  }
  bool bounded() const override {
    return std::any_of(kids_.begin(), kids_.end(), [](const NodePtr& k) { return k->bounded(); });
  }
  std::string text() const override {
    std::string t = "inter(";
    for (std::size_t i = 0; i < kids_.size(); ++i) t += (i ? "," : "") + kids_[i]->text();
    return t + ")";
  }
  std::optional<double> proposal_volume() const override {
    auto p = pick_sampler(kids_);
    return p ? std::optional<double>(p->second) : std::nullopt;
  }
  VolumeSample sample(double u, RngStream& rng) const override {
    auto p = pick_sampler(kids_);
    if (!p) throw GeometryError("no volume sampler for " + text());
    VolumeSample s = p->first->sample(u, rng);
    if (s.weight > 0.0 && !contains(s.y)) s.weight = 0.0;
    return s;
  }
  std::optional<Shell> shell() const override {
    if (kids_.size() != 2) return std::nullopt;
    auto a = kids_[0]->shell(), b = kids_[1]->shell();
    if (!a || !b || !(a->center == b->center)) return std::nullopt;
    return Shell{a->center, std::max(a->r_in, b->r_in), std::min(a->r_out, b->r_out)};
  }
  std::optional<Box> box() const override {
    std::optional<Box> b;
    for (const auto& k : kids_) {
      auto kb = k->box();
      if (!kb) continue;
      if (!b) {
        b = kb;
        continue;
      }
      for (int i = 0; i < dim(); ++i) {
        b->first[i] = std::max(b->first[i], kb->first[i]);
        b->second[i] = std::min(b->second[i], kb->second[i]);
      }
    }
    return b;
  }

 private:
  std::vector<NodePtr> kids_;
};

class DifferenceNode final : public Node {
 public:
  DifferenceNode(NodePtr a, NodePtr b) : Node(a->dim()), a_(std::move(a)), b_(std::move(b)) {}
  bool contains(const Point& x) const override {
    return a_->contains(x) && !b_->contains(x) && b_->outside_clearance(x) > 0.0;
  }
  double inside_clearance(const Point& x) const override {
    return std::min(a_->inside_clearance(x), b_->outside_clearance(x));
  }
  double outside_clearance(const Point& x) const override {
    double r = 0.0;
    if (!a_->contains(x)) r = std::max(r, a_->outside_clearance(x));
    if (b_->contains(x)) r = std::max(r, b_->inside_clearance(x));
    return r;
  }
  bool bounded() const override { return a_->bounded(); }
  std::string text() const override { return "diff(" + a_->text() + "," + b_->text() + ")"; }
  std::optional<double> proposal_volume() const override { return a_->proposal_volume(); }
  VolumeSample sample(double u, RngStream& rng) const override {
    VolumeSample s = a_->sample(u, rng);
    if (s.weight > 0.0 && !contains(s.y)) s.weight = 0.0;
    return s;
  }
  std::optional<Shell> shell() const override {
    auto a = a_->shell(), b = b_->shell();
    if (!a || !b || !(a->center == b->center)) return std::nullopt;
    if (a->r_in != 0.0 || b->r_in != 0.0 || !std::isfinite(b->r_out)) return std::nullopt;
    return Shell{a->center, std::min(b->r_out, a->r_out), a->r_out};
  }
  std::optional<Box> box() const override { return a_->box(); }

 private:
  NodePtr a_, b_;
};

Point normalized(const Point& v, const char* what) {
  const double n = v.norm();
  if (!(n > 0.0)) throw ParameterError(std::string(what) + " must be nonzero");
  return v * (1.0 / n);
}

}  // namespace

// ---------------------------------------------------------------------------

Domain Domain::ball(const Point& center, double radius) {
  if (!(radius > 0.0)) throw ParameterError("ball radius must be positive");
  return Domain(std::make_shared<BallNode>(center, radius));
}

Domain Domain::ball_complement(const Point& center, double radius) {
  if (!(radius > 0.0)) throw ParameterError("ball radius must be positive");
  return Domain(std::make_shared<BallComplementNode>(center, radius));
}

Domain Domain::half_space(const Point& normal, double offset) {
  return Domain(std::make_shared<HalfSpaceNode>(normalized(normal, "half-space normal"), offset));
}

Domain Domain::horn(int d, double beta, double A, double L) {
  return horn(beta, A, L, Point::zero(d), Point::basis(d, 0));
}

Domain Domain::horn(double beta, double A, double L, const Point& tip, const Point& axis) {
  if (!(beta > 0.0 && A > 0.0 && L > 0.0)) throw ParameterError("horn needs beta, A, L > 0");
  require_same_dim(axis, tip.dim(), "horn axis");
  return Domain(std::make_shared<HornNode>(beta, A, L, tip, normalized(axis, "horn axis")));
}

Domain Domain::fv_horn(int d, double gamma) { return fv_horn(gamma, Point::zero(d), Point::basis(d, 0)); }

Domain Domain::fv_horn(double gamma, const Point& origin, const Point& axis) {
  if (!(gamma > 0.0)) throw ParameterError("finite-volume horn needs gamma > 0");
  require_same_dim(axis, origin.dim(), "horn axis");
  return Domain(std::make_shared<FvHornNode>(gamma, origin, normalized(axis, "horn axis")));
}

Domain Domain::punctured_ball(const Point& center, double radius, const Point& puncture) {
  if (!(radius > 0.0)) throw ParameterError("ball radius must be positive");
  require_same_dim(puncture, center.dim(), "puncture");
  return Domain(std::make_shared<PuncturedBallNode>(center, radius, puncture));
}

Domain unite(const Domain& a, const Domain& b) {
  if (a.dim() != b.dim()) throw ParameterError("union: dimension mismatch");
  return Domain(std::make_shared<UnionNode>(std::vector<NodePtr>{a.root_, b.root_}));
}

Domain intersect(const Domain& a, const Domain& b) {
  if (a.dim() != b.dim()) throw ParameterError("intersection: dimension mismatch");
  return Domain(std::make_shared<IntersectNode>(std::vector<NodePtr>{a.root_, b.root_}));
}

Domain difference(const Domain& a, const Domain& b) {
  if (a.dim() != b.dim()) throw ParameterError("difference: dimension mismatch");
  return Domain(std::make_shared<DifferenceNode>(a.root_, b.root_));
}

int Domain::dim() const { return root_->dim(); }
bool Domain::bounded() const { return root_->bounded(); }

bool Domain::contains(const Point& x) const {
  require_same_dim(x, dim(), "contains");
  return root_->contains(x);
}

double Domain::interior_radius(const Point& x) const {
  require_same_dim(x, dim(), "interior_radius");
  if (!root_->contains(x)) throw DomainError("interior_radius: point " + levypot::to_string(x) + " is outside " + to_string());
  return root_->inside_clearance(x);
}

double Domain::clearance(const Point& x) const {
  require_same_dim(x, dim(), "clearance");
  return root_->clearance(x);
}

bool Domain::on_boundary(const Point& x, double tol) const {
  require_same_dim(x, dim(), "on_boundary");
  if (root_->contains(x)) return root_->inside_clearance(x) <= tol;
  return root_->outside_clearance(x) <= tol;
}

std::string Domain::to_string() const { return root_->text(); }
bool Domain::has_volume_sampler() const { return root_->proposal_volume().has_value(); }

VolumeSample Domain::sample_volume(double u, RngStream& rng) const { return root_->sample(u, rng); }

double Domain::sampler_volume() const {
  auto v = root_->proposal_volume();
  if (!v) throw GeometryError("no volume sampler for " + to_string());
  return *v;
}

std::optional<Shell> Domain::as_shell() const { return root_->shell(); }
std::optional<std::pair<Point, Point>> Domain::bounding_box() const { return root_->box(); }

Domain truncate_outside(const Domain& D, const Point& z0, double p) {
  if (!(p > 0.0)) throw ParameterError("truncation radius must be positive");
  return intersect(D, Domain::ball_complement(z0, p));
}

Domain truncate_inside(const Domain& D, const Point& z0, double p) {
  if (!(p > 0.0)) throw ParameterError("truncation radius must be positive");
  return intersect(D, Domain::ball(z0, p));
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(const std::string& text, int d) : s_(text), d_(d) {}

  Domain parse() {
    Domain D = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return D;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("domain: " + msg + " in '" + s_ + "'", pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_) fail("expected a name");
    return s_.substr(start, pos_ - start);
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '-' || s_[pos_] == '+' || s_[pos_] == 'e' || s_[pos_] == 'E'))
      ++pos_;
    if (start == pos_) fail("expected a number");
    const std::string tok = s_.substr(start, pos_ - start);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      pos_ = start;
      fail("bad number '" + tok + "'");
    }
  }

  Point point() {
    skip_ws();
    if (peek('[')) {
      expect('[');
      std::vector<double> xs{number()};
      while (peek(',')) {
        expect(',');
        xs.push_back(number());
      }
      expect(']');
      if (static_cast<int>(xs.size()) != d_) fail("point has " + std::to_string(xs.size()) + " coordinates, expected " + std::to_string(d_));
      return Point(xs);
    }
    return Point::filled(d_, number());
  }

  Domain expr() {
    skip_ws();
    const std::size_t at = pos_;
    const std::string name = ident();
    expect('(');
    Domain out = [&]() -> Domain {
      try {
        if (name == "ball" || name == "ballc") {
          const Point c = point();
          expect(';');
          const double r = number();
          return name == "ball" ? Domain::ball(c, r) : Domain::ball_complement(c, r);
        }
        if (name == "halfspace") {
          const Point n = point();
          expect(';');
          const double off = number();
          return Domain::half_space(n, off);
        }
        if (name == "punctured") {
          const Point c = point();
          expect(';');
          const double r = number();
          expect(';');
          const Point p = point();
          return Domain::punctured_ball(c, r, p);
        }
        if (name == "horn" || name == "fvhorn") return axial(name);
        if (name == "union" || name == "inter" || name == "diff") {
          std::vector<Domain> parts{expr()};
          while (peek(',')) {
            expect(',');
            parts.push_back(expr());
          }
          if (parts.size() < 2) fail(name + " needs at least two operands");
          if (name == "diff" && parts.size() != 2) fail("diff takes exactly two operands");
          Domain acc = parts[0];
          for (std::size_t i = 1; i < parts.size(); ++i)
            acc = name == "union" ? unite(acc, parts[i]) : name == "inter" ? intersect(acc, parts[i]) : difference(acc, parts[i]);
          return acc;
        }
      } catch (const ParameterError& e) {
        pos_ = at;
        fail(e.what());
      }
      pos_ = at;
      fail("unknown shape '" + name + "'");
    }();
    expect(')');
    return out;
  }

  Domain axial(const std::string& name) {
    std::optional<double> beta, A, L, gamma;
    std::optional<Point> tip, axis;
    bool first = true;
    while (!peek(')')) {
      if (!first) expect(',');
      first = false;
      const std::size_t at = pos_;
      const std::string key = ident();
      expect('=');
      if (key == "beta") beta = number();
      else if (key == "A") A = number();
      else if (key == "L") L = number();
      else if (key == "gamma") gamma = number();
      else if (key == "tip" || key == "origin") tip = point();
      else if (key == "axis") axis = point();
      else {
        pos_ = at;
        fail("unknown parameter '" + key + "'");
      }
    }
    const Point t = tip.value_or(Point::zero(d_));
    const Point ax = axis.value_or(Point::basis(d_, 0));
    if (name == "horn") {
      if (!beta) fail("horn needs beta");
      if (gamma) fail("horn does not take gamma");
      return Domain::horn(*beta, A.value_or(1.0), L.value_or(1.0), t, ax);
    }
    if (!gamma) fail("fvhorn needs gamma");
    if (beta || A || L) fail("fvhorn takes only gamma, origin and axis");
    return Domain::fv_horn(*gamma, t, ax);
  }

  const std::string& s_;
  int d_;
  std::size_t pos_ = 0;
};

}  // namespace

Domain parse_domain(const std::string& text, int d) {
  if (d < 1 || d > kMaxDim) throw ParameterError("dimension out of range");
  return Parser(text, d).parse();
}

}  // namespace levypot::geometry
