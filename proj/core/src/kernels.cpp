#include "levypot/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "levypot/errors.hpp"
#include "levypot/rng.hpp"

namespace levypot::kernels {

namespace {

constexpr double kPi = std::numbers::pi;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ParameterError("stable index alpha must be in (0,2)");
}

void check_dim(int d) {
  if (d < 1 || d > kMaxDim) throw ParameterError("dimension out of range");
}

// log of the Gaussian kernel (4 pi t)^{-d/2} exp(-r^2/4t).
double log_heat(int d, double t, double r) { return -r * r / (4.0 * t) - 0.5 * d * std::log(4.0 * kPi * t); }

QuadResult subordination_integral(const std::function<double(double)>& density, int d, double r, double t_hi) {
  if (!(r > 0.0)) throw ParameterError("radius must be positive");
  auto integrand = [&](double t) {
    if (t <= 0.0) return 0.0;
    const double lg = log_heat(d, t, r);
    if (lg < -745.0) return 0.0;
    const double m = density(t);
    return m == 0.0 ? 0.0 : std::exp(lg) * m;
  };
  const double ts = r * r / (2.0 * d);
  std::vector<double> breaks{ts / 64.0, ts / 8.0, ts, 8.0 * ts, 64.0 * ts};
  return integrate_split(integrand, 0.0, t_hi, breaks, {1e-300, 1e-11});
}

}  // namespace

double sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d); }
double ball_volume(int d) { return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

double stable_jump_constant(int d, double alpha) {
  check_alpha(alpha);
  check_dim(d);
  return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma(0.5 * (d + alpha)) /
         (std::pow(kPi, 0.5 * d) * std::tgamma(1.0 - 0.5 * alpha));
}

double stable_jump_density(int d, double alpha, double r) {
  if (!(r > 0.0)) throw ParameterError("radius must be positive");
  return stable_jump_constant(d, alpha) * std::pow(r, -d - alpha);
}

double stable_green_constant(int d, double alpha) {
  check_alpha(alpha);
  if (!(d > alpha)) throw UnsupportedModelError("free Green function needs d > alpha");
  return std::tgamma(0.5 * (d - alpha)) / (std::pow(2.0, alpha) * std::pow(kPi, 0.5 * d) * std::tgamma(0.5 * alpha));
}

double stable_poisson_constant(int d, double alpha) {
  check_alpha(alpha);
  check_dim(d);
  return std::tgamma(0.5 * d) * std::pow(kPi, -0.5 * d - 1.0) * std::sin(0.5 * kPi * alpha);
}

double stable_exit_time_constant(int d, double alpha) {
  check_alpha(alpha);
  check_dim(d);
  return std::tgamma(0.5 * d) /
         (std::pow(2.0, alpha) * std::tgamma(1.0 + 0.5 * alpha) * std::tgamma(0.5 * (d + alpha)));
}

double ball_mean_exit_time(int d, double alpha, double radius, double dist_from_center) {
  const double s = radius * radius - dist_from_center * dist_from_center;
  if (s <= 0.0) return 0.0;
  return stable_exit_time_constant(d, alpha) * std::pow(s, 0.5 * alpha);
}

double ball_poisson_kernel(int d, double alpha, const Point& center, double radius, const Point& x, const Point& z) {
  const double rx2 = (x - center).norm2();
  const double rz2 = (z - center).norm2();
  const double r2 = radius * radius;
  if (rx2 >= r2 || rz2 <= r2) return 0.0;
  const double dxz = distance(x, z);
  return stable_poisson_constant(d, alpha) * std::pow((r2 - rx2) / (rz2 - r2), 0.5 * alpha) * std::pow(dxz, -d);
}

double ball_green_function(int d, double alpha, const Point& center, double radius, const Point& x, const Point& y) {
  check_alpha(alpha);
  if (!(d > alpha)) throw UnsupportedModelError("ball Green function implemented for d > alpha");
  const double r2 = radius * radius;
  const double ax = r2 - (x - center).norm2();
  const double ay = r2 - (y - center).norm2();
  if (ax <= 0.0 || ay <= 0.0) return 0.0;
  const double dxy = distance(x, y);
  if (dxy == 0.0) throw SingularityError("ball Green function is singular on the diagonal");
  const double w = ax * ay / (r2 * dxy * dxy);
  const double a = 0.5 * alpha, b = 0.5 * (d - alpha);
  const double kappa =
      std::tgamma(0.5 * d) / (std::pow(2.0, alpha) * std::pow(kPi, 0.5 * d) * std::pow(std::tgamma(0.5 * alpha), 2));
  return kappa * std::pow(dxy, alpha - d) * boost::math::beta(a, b, w / (1.0 + w));
}

QuadResult subordinate_jump_density(const CompleteBernsteinFunction& f, int d, double r) {
  check_dim(d);
  return subordination_integral([&](double t) { return f.mu(t); }, d, r, std::numeric_limits<double>::infinity());
}

QuadResult free_green_density(const CompleteBernsteinFunction& f, int d, double r) {
  check_dim(d);
  if (!f.has_u()) throw UnsupportedModelError("potential density unavailable for '" + f.name() + "'");
  if (f.family() == bernstein::Family::Stable && !(d > 2.0 * f.index()))
    throw UnsupportedModelError("process is recurrent: free Green function needs d > alpha");
  return subordination_integral([&](double t) { return f.u(t); }, d, r, std::numeric_limits<double>::infinity());
}

double truncation_tail_fraction(const CompleteBernsteinFunction& f, int d, double eta, double r) {
  if (!(eta > 0.0)) throw ParameterError("eta must be positive");
  const double total = subordinate_jump_density(f, d, r).value;
  if (std::isinf(eta)) return 1.0;
  const double part =
      subordination_integral([&](double t) { return f.mu(t); }, d, r, eta).value;
  return std::clamp(part / total, 0.0, 1.0);
}

double truncation_tail_sup(const CompleteBernsteinFunction& f, int d, double eta, double r0, double r_hi,
                           std::size_t grid) {
  double sup = 0.0;
  for (double r : log_grid(r0 * (1.0 + 1e-12), r_hi, grid)) sup = std::max(sup, truncation_tail_fraction(f, d, eta, r));
  return sup;
}

// ---------------------------------------------------------------------------
// ProcessModel

struct ProcessModel::Impl {
  int d = 0;
  ModelKind kind = ModelKind::Stable;
  std::string id;
  double alpha = 0.0;
  double jump_const = 0.0;
  std::optional<CompleteBernsteinFunction> f;
  std::shared_ptr<const Impl> base;
  DirectionFn k;
  double k_min = 1.0, k_max = 1.0;

  // Cubic spline of log j over log r for subordinate models.
  mutable std::once_flag table_once;
  mutable std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> table;
  mutable double table_lo = 0.0, table_hi = 0.0;

  void build_table() const {
    const double lo = std::log(1e-4), step = std::log(10.0) / 48.0;
    std::vector<double> logj;
    for (int i = 0; i <= 8 * 48; ++i) {
      const double r = std::exp(lo + i * step);
      double v = 0.0;
      try {
        v = subordinate_jump_density(*f, d, r).value;
      } catch (const NumericError&) {
        break;
      }
      if (!(v > 1e-280)) break;
      logj.push_back(std::log(v));
    }
    if (logj.size() < 8) throw NumericError("could not tabulate jump density of '" + id + "'");
    table_lo = lo;
    table_hi = lo + (logj.size() - 1) * step;
    table = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(logj.begin(), logj.end(),
                                                                                         lo, step);
  }

  double radial(double r) const {
    if (!(r > 0.0)) throw SingularityError("jump density is singular at r = 0");
    if (kind == ModelKind::Anisotropic) return base->radial(r);
    if (kind == ModelKind::Stable) return jump_const * std::pow(r, -d - alpha);
    std::call_once(table_once, [this] { build_table(); });
    const double lr = std::log(r);
    if (lr < table_lo) return std::exp((*table)(table_lo) + table->prime(table_lo) * (lr - table_lo));
    if (lr > table_hi) return std::exp((*table)(table_hi) + table->prime(table_hi) * (lr - table_hi));
    return std::exp((*table)(lr));
  }
};

ProcessModel ProcessModel::stable(int d, double alpha) {
  check_dim(d);
  check_alpha(alpha);
  auto impl = std::make_shared<Impl>();
  impl->d = d;
  impl->kind = ModelKind::Stable;
  impl->alpha = alpha;
  impl->jump_const = stable_jump_constant(d, alpha);
  std::ostringstream id;
  id << "stable:d=" << d << ":alpha=" << alpha;
  impl->id = id.str();
  return ProcessModel(impl);
}

ProcessModel ProcessModel::subordinate_bm(int d, const CompleteBernsteinFunction& f) {
  check_dim(d);
  auto impl = std::make_shared<Impl>();
  impl->d = d;
  impl->kind = ModelKind::SubordinateBM;
  impl->f = f;
  if (f.family() == bernstein::Family::Stable) impl->alpha = 2.0 * f.index();
  impl->id = "sbm:d=" + std::to_string(d) + ":" + f.name();
  return ProcessModel(impl);
}

ProcessModel ProcessModel::anisotropic(const ProcessModel& base, DirectionFn k, const std::string& k_name) {
  if (!base.isotropic()) throw ParameterError("anisotropic base must be isotropic");
  auto impl = std::make_shared<Impl>();
  impl->d = base.dim();
  impl->kind = ModelKind::Anisotropic;
  impl->alpha = base.impl_->alpha;
  impl->base = base.impl_;
  impl->k = std::move(k);
  double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0;
  RngStream rng(0x5eedULL, 0);
  for (const Point& th : direction_grid(impl->d, 4096)) {
    const double v = impl->k(th);
    kmin = std::min(kmin, v);
    kmax = std::max(kmax, v);
  }
  for (int i = 0; i < 4096; ++i) {
    const double v = impl->k(rng.direction(impl->d));
    kmin = std::min(kmin, v);
    kmax = std::max(kmax, v);
  }
  if (!(kmin > 0.0) || !std::isfinite(kmax))
    throw ParameterError("direction weight k must be bounded between positive constants");
  impl->k_min = kmin;
  impl->k_max = kmax;
  impl->id = "aniso:" + base.id() + ":k=" + k_name;
  return ProcessModel(impl);
}

namespace {

double parse_keyed(const std::string& tok, const std::string& key, const std::string& id) {
  const std::string prefix = key + "=";
  if (tok.rfind(prefix, 0) != 0) throw ParseError("expected '" + prefix + "' in model id '" + id + "'", id.find(tok));
  const std::string v = tok.substr(prefix.size());
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + v + "' in model id '" + id + "'", id.find(tok) + prefix.size());
  }
}

int parse_dim(const std::string& tok, const std::string& id) {
  const double d = parse_keyed(tok, "d", id);
  if (d != std::floor(d) || d < 1 || d > kMaxDim) throw ParseError("bad dimension in model id '" + id + "'", id.find(tok));
  return static_cast<int>(d);
}

}  // namespace

ProcessModel ProcessModel::parse(const std::string& id) {
  std::vector<std::string> parts;
  {
    std::string cur;
    for (char c : id) {
      if (c == ':') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    parts.push_back(cur);
  }
  if (parts.empty() || parts[0].empty()) throw ParseError("empty model id", 0);
  if (parts[0] == "stable") {
    if (parts.size() != 3) throw ParseError("stable model id needs 'stable:d=<d>:alpha=<a>'", 0);
    const int d = parse_dim(parts[1], id);
    const double alpha = parse_keyed(parts[2], "alpha", id);
    try {
      return stable(d, alpha);
    } catch (const ParameterError& e) {
      throw ParseError(std::string(e.what()) + " in model id '" + id + "'", id.find(parts[2]));
    }
  }
  if (parts[0] == "sbm") {
    if (parts.size() < 3) throw ParseError("sbm model id needs 'sbm:d=<d>:<subordinator>'", 0);
    const int d = parse_dim(parts[1], id);
    const std::size_t off = parts[0].size() + parts[1].size() + 2;
    const std::string sub = id.substr(off);
    try {
      return subordinate_bm(d, bernstein::parse_subordinator(sub));
    } catch (const ParseError& e) {
      throw ParseError(std::string("in model id '") + id + "': " + e.what(), off + e.position());
    } catch (const ParameterError& e) {
      throw ParseError(std::string(e.what()) + " in model id '" + id + "'", off);
    }
  }
  if (parts[0] == "aniso") {
    const std::size_t kpos = id.rfind(":k=");
    if (kpos == std::string::npos || kpos < 6) throw ParseError("anisotropic model id needs ':k=<name>'", id.size());
    const std::string base_id = id.substr(6, kpos - 6);
    const std::string kname = id.substr(kpos + 3);
    ProcessModel base = parse(base_id);
    if (kname == "cosine") {
      return anisotropic(base, [](const Point& th) { return 2.0 + th[0]; }, "cosine");
    }
    if (kname == "uniform") {
      return anisotropic(base, [](const Point&) { return 1.0; }, "uniform");
    }
    throw ParseError("unknown direction weight '" + kname + "'", kpos + 3);
  }
  throw ParseError("unknown model kind '" + parts[0] + "'", 0);
}

int ProcessModel::dim() const { return impl_->d; }
ModelKind ProcessModel::kind() const { return impl_->kind; }
const std::string& ProcessModel::id() const { return impl_->id; }

double ProcessModel::alpha() const {
  if (impl_->alpha > 0.0) return impl_->alpha;
  throw UnsupportedModelError("model '" + impl_->id + "' has no stable index");
}

const CompleteBernsteinFunction* ProcessModel::subordinator() const {
  const Impl* p = impl_->kind == ModelKind::Anisotropic ? impl_->base.get() : impl_.get();
  return p->f ? &*p->f : nullptr;
}

double ProcessModel::k_min() const { return impl_->k_min; }
double ProcessModel::k_max() const { return impl_->k_max; }

double ProcessModel::jump_density(double r) const { return impl_->radial(r); }

double ProcessModel::jump_density(const Point& x, const Point& y) const {
  require_same_dim(x, impl_->d, "jump_density");
  require_same_dim(y, impl_->d, "jump_density");
  const Point v = y - x;
  const double r = v.norm();
  if (impl_->kind == ModelKind::Anisotropic) return impl_->k(v * (1.0 / r)) * impl_->base->radial(r);
  return impl_->radial(r);
}

bool ProcessModel::has_green() const {
  switch (impl_->kind) {
    case ModelKind::Stable:
      return impl_->d > impl_->alpha;
    case ModelKind::SubordinateBM:
      return impl_->f->has_u() && (impl_->f->family() != bernstein::Family::Stable || impl_->d > impl_->alpha);
    case ModelKind::Anisotropic:
      return false;
  }
  return false;
}

double ProcessModel::green(double r) const {
  if (!has_green()) throw UnsupportedModelError("free Green function unavailable for '" + impl_->id + "'");
  if (!(r > 0.0)) throw SingularityError("free Green function is singular at r = 0");
  if (impl_->kind == ModelKind::Stable) return stable_green_constant(impl_->d, impl_->alpha) * std::pow(r, impl_->alpha - impl_->d);
  return free_green_density(*impl_->f, impl_->d, r).value;
}

double ProcessModel::psi0(double r) const {
  const Impl* p = impl_->kind == ModelKind::Anisotropic ? impl_->base.get() : impl_.get();
  if (p->kind == ModelKind::Stable) return std::pow(r, p->alpha);
  return p->f->phi(r * r);
}

// ---------------------------------------------------------------------------

double j_ratio_sup(const ProcessModel& model, double r0, double delta, std::size_t grid) {
  if (!model.isotropic()) throw UnsupportedModelError("j_ratio_sup needs an isotropic model");
  if (!(r0 > 0.0)) throw ParameterError("r0 must be positive");
  if (!(delta >= 0.0)) throw ParameterError("delta must be nonnegative");
  if (delta == 0.0) return 1.0;
  double hi = std::max(1.0, r0) * 1e3;
  std::vector<double> ratios;
  for (double r : log_grid(r0, hi, grid)) {
    const double a = model.jump_density(r), b = model.jump_density(r + delta);
    if (!(b > 0.0)) break;
    ratios.push_back(a / b);
  }
  if (ratios.empty()) throw NumericError("jump density vanishes on the grid");
  return std::max(1.0, *std::max_element(ratios.begin(), ratios.end()));
}

std::vector<Point> direction_grid(int d, int n) {
  std::vector<Point> out;
  out.reserve(n);
  if (d == 1) {
    for (int i = 0; i < n; ++i) out.push_back(Point{i % 2 == 0 ? 1.0 : -1.0});
    return out;
  }
  if (d == 2) {
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * kPi * i / n;
      out.push_back(Point{std::cos(a), std::sin(a)});
    }
    return out;
  }
  if (d == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / n;
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      out.push_back(Point{s * std::cos(golden * i), s * std::sin(golden * i), z});
    }
    return out;
  }
  RngStream rng(0xd1ec7105ULL, static_cast<std::uint64_t>(d));
  for (int i = 0; i < n; ++i) out.push_back(rng.direction(d));
  return out;
}

namespace {

// Shared probe loop. near(t) maps t in [0,1] to a point in the "near" set,
// far(t) to the "far" set, ratio(near, far) is the tested quotient.
template <class NearFn, class FarFn, class RatioFn>
PSearchResult probe_worst(const ProcessModel& model, const PSearchOptions& opt, NearFn near, FarFn far,
                          RatioFn ratio) {
  const int d = model.dim();
  const auto dirs = direction_grid(d, opt.angular);
  PSearchResult res;
  double worst = 1.0;
  constexpr int kNearRadii = 8;
  for (int a = 0; a < opt.angular; ++a) {
    for (int ri = 0; ri < opt.radial; ++ri) {
      const Point y = far(static_cast<double>(ri) / std::max(opt.radial - 1, 1), dirs[a]);
      for (int b = 0; b < opt.angular; ++b) {
        for (int zi = 0; zi <= kNearRadii; ++zi) {
          const Point z = near(static_cast<double>(zi) / kNearRadii, dirs[b]);
          const double q = ratio(z, y);
          worst = std::max(worst, std::max(q, 1.0 / q));
          ++res.probes;
        }
      }
    }
  }
  RngStream rng(opt.seed, 0xe1e2ULL);
  for (std::uint64_t i = 0; i < opt.random_probes; ++i) {
    const Point z = near(std::pow(rng.uniform(), 1.0 / d), rng.direction(d));
    const Point y = far(rng.uniform(), rng.direction(d));
    const double q = ratio(z, y);
    worst = std::max(worst, std::max(q, 1.0 / q));
    ++res.probes;
  }
  res.worst_ratio = worst;
  return res;
}

constexpr double kInside = 1.0 - 1e-9;
constexpr double kFarDecades = 4.0;

}  // namespace

PSearchResult e1_worst_ratio(const ProcessModel& model, const Point& z0, double p, double q, double r,
                             const PSearchOptions& opt) {
  require_same_dim(z0, model.dim(), "e1_worst_ratio");
  const double zr = 8.0 * p * r * kInside, yr = q * r / kInside;
  auto near = [&](double t, const Point& th) { return z0 + th * (t * zr); };
  auto far = [&](double t, const Point& th) { return z0 + th * (yr * std::pow(10.0, kFarDecades * t)); };
  auto ratio = [&](const Point& z, const Point& y) { return model.jump_density(z, y) / model.jump_density(z0, y); };
  PSearchResult res = probe_worst(model, opt, near, far, ratio);
  res.p = p;
  return res;
}

PSearchResult e2_worst_ratio(const ProcessModel& model, const Point& z0, double p, double q, double r,
                             const PSearchOptions& opt) {
  require_same_dim(z0, model.dim(), "e2_worst_ratio");
  const double zr = p * r / 8.0 / kInside, yr = q * r;
  // z plays the far role here, y the near role within the closed ball.
  auto near = [&](double t, const Point& th) { return z0 + th * (t * yr); };
  auto far = [&](double t, const Point& th) { return z0 + th * (zr * std::pow(10.0, kFarDecades * t)); };
  auto ratio = [&](const Point& y, const Point& z) { return model.jump_density(z, y) / model.jump_density(z, z0); };
  PSearchResult res = probe_worst(model, opt, near, far, ratio);
  res.p = p;
  return res;
}

namespace {

// Bisection over a geometric index ladder for a monotone pass/fail predicate
// that passes at large indices.
template <class Ok>
std::optional<int> first_passing(int max_index, Ok ok) {
  if (!ok(max_index)) return std::nullopt;
  int lo = -1, hi = max_index;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (ok(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

PSearchResult find_p_for_E1(const ProcessModel& model, const Point& z0, double epsilon, double q, double r,
                            const PSearchOptions& opt) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (!(q > 0.0 && q <= 0.5)) throw ParameterError("E1 needs q in (0, 1/2]");
  if (!(r > 0.0)) throw ParameterError("r must be positive");
  const double pmax = q / 16.0 * (1.0 - 1e-9);
  const int steps = static_cast<int>(std::ceil(std::log(1e-8) / std::log(opt.step)));
  auto p_at = [&](int k) { return pmax * std::pow(opt.step, k); };
  PSearchResult best;
  auto ok = [&](int k) {
    PSearchResult res = e1_worst_ratio(model, z0, p_at(k), q, r, opt);
    const bool pass = res.worst_ratio < 1.0 + epsilon;
    if (pass) best = res;
    return pass;
  };
  // Index k grows as p shrinks; the predicate holds for all large k.
  auto found = first_passing(steps, ok);
  if (!found) throw SearchFailure("no valid p for E1 on the search grid");
  ok(*found);
  return best;
}

PSearchResult find_p_for_E2(const ProcessModel& model, const Point& z0, double epsilon, double q, double r,
                            const PSearchOptions& opt) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (!(q >= 2.0)) throw ParameterError("E2 needs q >= 2");
  if (!(r > 0.0)) throw ParameterError("r must be positive");
  const double pmin = 16.0 * q * (1.0 + 1e-9);
  const double grow = 1.0 / opt.step;
  const int steps = static_cast<int>(std::ceil(std::log(1e8) / std::log(grow)));
  auto p_at = [&](int k) { return pmin * std::pow(grow, k); };
  PSearchResult best;
  auto ok = [&](int k) {
    PSearchResult res = e2_worst_ratio(model, z0, p_at(k), q, r, opt);
    const bool pass = res.worst_ratio < 1.0 + epsilon;
    if (pass) best = res;
    return pass;
  };
  auto found = first_passing(steps, ok);
  if (!found) throw SearchFailure("no valid p for E2 on the search grid");
  ok(*found);
  return best;
}

AsymptoticsReport check_j_asymptotics(const ProcessModel& model, const std::vector<double>& r_grid, double tolerance) {
  if (r_grid.size() < 3) throw ParameterError("asymptotics check needs at least three radii");
  AsymptoticsReport rep;
  rep.tolerance = tolerance;
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const double r = r_grid[i];
    if (i > 0 && !(r > r_grid[i - 1])) throw ParameterError("radius grid must be increasing");
    rep.r.push_back(r);
    rep.ratio.push_back(model.jump_density(r) * std::pow(r, model.dim()) / model.psi0(1.0 / r));
  }
  const auto tail = std::vector<double>(rep.ratio.end() - 3, rep.ratio.end());
  const double mx = *std::max_element(tail.begin(), tail.end());
  const double mn = *std::min_element(tail.begin(), tail.end());
  rep.spread = mx / mn - 1.0;
  rep.stabilizes = mn > 0.0 && rep.spread <= tolerance;
  return rep;
}

QuadResult levy_measure_integral(const ProcessModel& model) {
  const int d = model.dim();
  const double area = sphere_area(d);
  // For anisotropic models k_max gives an upper bound on the angular factor.
  const double kavg = model.isotropic() ? 1.0 : model.k_max();
  auto inner = [&](double r) {
    if (r <= 0.0) return 0.0;
    // j overflows only where the integrand is negligible.
    const double v = area * kavg * r * r * model.jump_density(r) * std::pow(r, d - 1);
    return std::isfinite(v) ? v : 0.0;
  };
  auto outer = [&](double r) { return area * kavg * model.jump_density(r) * std::pow(r, d - 1); };
  QuadResult a = integrate(inner, 0.0, 1.0, {1e-14, 1e-8});
  QuadResult b = integrate_to_infinity(outer, 1.0, {1e-14, 1e-8});
  return {a.value + b.value, a.error + b.error, a.evaluations + b.evaluations};
}

}  // namespace levypot::kernels
