// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "levypot/bernstein.hpp"
#include "levypot/experiment.hpp"
#include "levypot/geometry.hpp"
#include "levypot/kernels.hpp"
#include "levypot/parallel.hpp"
#include "levypot/potential.hpp"
#include "levypot/simulate.hpp"
#include "oracles.hpp"

using namespace levypot;
namespace fs = std::filesystem;
using geometry::Domain;
using kernels::ProcessModel;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string est(const Estimate& e) { return fmt("%.6g", e.value) + " +- " + fmt("%.2g", e.std_error); }

// ---------------------------------------------------------------- 1

Outcome cauchy_density() {
  const auto f = bernstein::make_stable_subordinator(0.5);
  double worst = 0.0;
  for (double r : {0.5, 1.0, 2.0, 10.0}) {
    const double exact = 1.0 / (std::numbers::pi * r * r);
    worst = std::max(worst, std::abs(kernels::subordinate_jump_density(f, 1, r).value / exact - 1.0));
  }
  return {worst <= 1e-6, "max relative error " + fmt("%.3g", worst) + " (tolerance 1e-6)"};
}

// ---------------------------------------------------------------- 2

Outcome mu_upper_bound() {
  const std::vector<bernstein::CompleteBernsteinFunction> fs{
      bernstein::make_stable_subordinator(0.25), bernstein::make_stable_subordinator(0.5),
      bernstein::make_stable_subordinator(0.75), bernstein::make_gamma_subordinator(),
      bernstein::make_geometric_stable_subordinator(1.0)};
  const auto grid = log_grid(1e-3, 1e3, 400);
  bool ok = true;
  std::string detail;
  for (const auto& f : fs) {
    const auto rep = bernstein::check_mu_upper_bound(f, grid);
    ok = ok && rep.holds && rep.margin > 0.0 && rep.grid_points == 400;
    detail += f.name() + " margin " + fmt("%.3g", rep.margin) + "; ";
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 3

Outcome gamma_mu_ratio() {
  const auto f = bernstein::make_gamma_subordinator();
  bool ok = true;
  std::string detail;
  std::vector<double> seq;
  for (double delta : {0.1, 0.01}) {
    const double got = bernstein::mu_ratio_sup(f, 1.0, delta);
    const double want = (1.0 + delta) * std::exp(delta);
    ok = ok && std::abs(got - want) <= 1e-3;
    seq.push_back(got);
    detail += "delta=" + fmt("%g", delta) + ": " + fmt("%.6f", got) + " vs " + fmt("%.6f", want) + "; ";
  }
  for (double delta : {1e-3, 1e-4}) seq.push_back(bernstein::mu_ratio_sup(f, 1.0, delta));
  for (std::size_t i = 1; i < seq.size(); ++i) ok = ok && seq[i] < seq[i - 1] && seq[i] > 1.0;
  detail += "sequence down to delta=1e-4 ends at " + fmt("%.6f", seq.back());
  return {ok, detail};
}

// ---------------------------------------------------------------- 4

Outcome truncation_and_jump_ratio() {
  const auto f = bernstein::make_stable_subordinator(0.5);
  std::vector<double> tails;
  for (double eta : {1e-1, 1e-2, 1e-3}) tails.push_back(kernels::truncation_tail_sup(f, 2, eta, 0.5));
  bool ok = tails[2] < 1e-3;
  for (std::size_t i = 1; i < tails.size(); ++i) ok = ok && tails[i] <= tails[i - 1];
  std::string detail = "tail sup at eta=1e-3: " + fmt("%.3g", tails[2]) + "; ";
  const auto model = ProcessModel::stable(2, 1.0);
  const double r0 = 1.0;
  std::vector<double> ratios;
  double worst = 0.0;
  for (double delta : {0.1, 0.01, 1e-3}) {
    const double got = kernels::j_ratio_sup(model, r0, delta);
    const double want = std::pow((r0 + delta) / r0, 3.0);
    worst = std::max(worst, std::abs(got / want - 1.0));
    ratios.push_back(got);
  }
  for (std::size_t i = 1; i < ratios.size(); ++i) ok = ok && ratios[i] < ratios[i - 1];
  ok = ok && ratios.back() < 1.01 && worst <= 1e-3;
  detail += "j ratio sup at delta=1e-3: " + fmt("%.6f", ratios.back()) + ", max relative deviation from analytic " +
            fmt("%.3g", worst);
  return {ok, detail};
}

// ---------------------------------------------------------------- 5

double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return worst;
}

struct OracleRun {
  std::vector<double> radii;
  double seconds = 0.0;
  bool cached = false;
};

OracleRun path_oracle(const Point& x, std::uint64_t n, double step) {
  const fs::path dir = std::getenv("LEVYPOT_CACHE_DIR") ? fs::path(std::getenv("LEVYPOT_CACHE_DIR")) : fs::path(LEVYPOT_CACHE_DIR);
  std::ostringstream name;
  name << "exit_radius_d2_a1_x" << x[0] << "_" << x[1] << "_n" << n << "_h" << step << ".bin";
  const fs::path file = dir / name.str();
  OracleRun run;
  if (std::ifstream in{file, std::ios::binary}) {
    run.radii.resize(n);
    in.read(reinterpret_cast<char*>(&run.seconds), sizeof run.seconds);
    in.read(reinterpret_cast<char*>(run.radii.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (in) {
      run.cached = true;
      return run;
    }
  }
  const auto model = ProcessModel::stable(2, 1.0);
  const auto D = Domain::ball(Point::zero(2), 1.0);
  simulate::SubordinatedWalkOptions opt;
  opt.step_factor = step;
  const auto start = std::chrono::steady_clock::now();
  run.radii = generate_samples<double>(SamplingPlan{n, 505, 1, 1, 1024}, [&](RngStream& rng, std::uint64_t) {
    return simulate::subordinated_walk_exit(model, D, x, rng, opt).exit_point.norm();
  });
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fs::create_directories(dir);
  std::ofstream out(file, std::ios::binary);
  out.write(reinterpret_cast<const char*>(&run.seconds), sizeof run.seconds);
  out.write(reinterpret_cast<const char*>(run.radii.data()), static_cast<std::streamsize>(n * sizeof(double)));
  return run;
}

Outcome ball_exit_ks() {
  const std::uint64_t n = 100000;
  const Point x{0.5, 0.0};
  const OracleRun oracle = path_oracle(x, n, 1e-3);
  const auto sampled = generate_samples<double>(SamplingPlan{n, 506, 2, 1, 1024}, [&](RngStream& rng, std::uint64_t) {
    return simulate::ball_exit_sample(1.0, 2, x, rng).norm();
  });
  const double ks = ks_distance(sampled, oracle.radii);
  const bool ok = ks < 0.01 && oracle.seconds < 300.0;
  return {ok, "KS " + fmt("%.4f", ks) + " (limit 0.01); oracle generation " + fmt("%.1f", oracle.seconds) + " s" +
                  (oracle.cached ? " (cached)" : "")};
}

// ---------------------------------------------------------------- 6

Outcome levy_system() {
  const auto model = ProcessModel::stable(2, 1.0);
  const auto D = geometry::parse_domain("ball(0;1)", 2);
  const auto A = geometry::parse_domain("diff(ball(0;3),ball(0;2))", 2);
  simulate::RunOptions opt;
  opt.n = 1000000;
  opt.seed = 606;
  const auto rep = simulate::levy_system_check(model, D, Point{0.3, 0.2}, A, opt);
  return {std::abs(rep.z) <= 3.0,
          "direct " + est(rep.direct) + ", levy " + est(rep.levy) + ", z " + fmt("%.3f", rep.z)};
}

// ---------------------------------------------------------------- 7

Outcome green_function() {
  const auto model = ProcessModel::stable(3, 1.0);
  const auto D = Domain::ball(Point::zero(3), 1.0);
  const Point x{0.2, 0.0, 0.0}, y{-0.3, 0.0, 0.0};
  simulate::RunOptions opt;
  opt.n = 100000;
  opt.seed = 707;
  const Estimate gxy = simulate::green_function(model, D, x, y, opt);
  opt.tag = 1;
  const Estimate gyx = simulate::green_function(model, D, y, x, opt);
  const double closed = kernels::ball_green_function(3, 1.0, Point::zero(3), 1.0, x, y);
  const double quad = oracle::ball_green_axis_3d(1.0, 0.2, -0.3);
  const Estimate exact{closed, 0.0, 0, false};
  const double z_sym = z_score(gxy, gyx);
  const double z_closed = z_score(gxy, exact);
  const double oracle_gap = std::abs(closed / quad - 1.0);
  opt.tag = 2;
  const double r = 2.0;
  const Estimate big = simulate::green_function(model, Domain::ball(Point::zero(3), r), x * r, y * r, opt);
  Estimate scaled = gxy;
  const double factor = std::pow(r, 1.0 - 3.0);
  scaled.value *= factor;
  scaled.std_error *= factor;
  const double z_scale = z_score(big, scaled);
  const bool ok = std::abs(z_sym) <= 3.0 && std::abs(z_closed) <= 3.0 && std::abs(z_scale) <= 3.0 && oracle_gap < 1e-6;
  return {ok, "G(x,y) " + est(gxy) + ", closed form " + fmt("%.6g", closed) + " (quadrature oracle gap " +
                  fmt("%.1g", oracle_gap) + "); z symmetry " + fmt("%.2f", z_sym) + ", closed " + fmt("%.2f", z_closed) +
                  ", scaling " + fmt("%.2f", z_scale)};
}

// ---------------------------------------------------------------- 8

Outcome accessibility() {
  struct Case {
    const char* name;
    ProcessModel model;
    Domain D;
    std::optional<Point> z0;
    Point a1, a2;
    potential::Status want;
  };
  const std::vector<Case> cases{
      {"finite-volume horn at infinity", ProcessModel::stable(2, 1.0), geometry::parse_domain("fvhorn(gamma=3)", 2),
       std::nullopt, Point{1.3, 0.0}, Point{2.0, 0.05}, potential::Status::Inaccessible},
      {"ball complement at infinity", ProcessModel::stable(3, 1.0), geometry::parse_domain("ballc(0;1)", 3),
       std::nullopt, Point{2.0, 0.0, 0.0}, Point{1.5, 0.5, 0.0}, potential::Status::Accessible},
      {"punctured ball at the puncture", ProcessModel::stable(2, 1.0), geometry::parse_domain("punctured(0;1;0)", 2),
       Point{0.0, 0.0}, Point{0.5, 0.0}, Point{-0.3, 0.4}, potential::Status::Accessible},
      {"thin horn at the tip", ProcessModel::stable(2, 1.0), geometry::parse_domain("horn(beta=3,A=1,L=1)", 2),
       Point{0.0, 0.0}, Point{0.8, 0.0}, Point{0.6, 0.1}, potential::Status::Inaccessible},
  };
  bool ok = true;
  std::string detail;
  std::uint64_t tag = 0;
  for (const auto& c : cases) {
    simulate::RunOptions opt;
    opt.n = 100000;
    opt.seed = 808;
    std::vector<potential::Status> got;
    for (const Point& a : {c.a1, c.a2}) {
      opt.tag = tag++;
      const auto v = c.z0 ? potential::accessibility_finite(c.model, c.D, *c.z0, a, opt)
                          : potential::accessibility_infinity(c.model, c.D, a, opt);
      got.push_back(v.status);
    }
    const bool good = got[0] == c.want && got[1] == c.want;
    ok = ok && good;
    detail += std::string(c.name) + ": " + potential::to_string(got[0]) + "/" + potential::to_string(got[1]) + "; ";
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 9

Outcome martin_infinity() {
  const auto model = ProcessModel::stable(2, 1.0);
  const auto D = geometry::parse_domain("fvhorn(gamma=3)", 2);
  simulate::RunOptions opt;
  opt.n = 100000;
  opt.seed = 909;
  const auto rep =
      potential::martin_limit_infinity(model, D, Point{1.3, 0.25}, Point{1.3, 0.0}, {2, 4, 8, 16, 32, 64}, opt);
  const auto& last = rep.ratio_sequence.back();
  const bool ok = rep.has_prediction && rep.verdict.status == potential::Status::Inaccessible &&
                  std::abs(rep.agreement_z) <= 3.0;
  return {ok, "ratio at R=64 " + est(last.ratio) + ", exit-time ratio " + est(rep.predicted_limit) + ", max |z| " +
                  fmt("%.2f", rep.agreement_z) + ", verdict " + potential::to_string(rep.verdict.status)};
}

// ---------------------------------------------------------------- 10

Outcome martin_finite() {
  const auto model = ProcessModel::stable(2, 1.0);
  const auto D = geometry::parse_domain("horn(beta=3,A=1,L=1)", 2);
  simulate::RunOptions opt;
  opt.n = 100000;
  opt.seed = 1010;
  const auto rep = potential::martin_limit_finite(model, D, Point{0.75, 0.2}, Point{0.8, 0.0}, Point{0.0, 0.0},
                                                  {0.32, 0.16, 0.08, 0.04, 0.02, 0.01}, opt);
  const auto& last = rep.ratio_sequence.back();
  const bool ok = rep.has_prediction && rep.verdict.status == potential::Status::Inaccessible &&
                  std::abs(rep.agreement_z) <= 3.0;
  return {ok, "ratio at s=0.01 " + est(last.ratio) + ", Poisson-kernel ratio " + est(rep.predicted_limit) +
                  ", max |z| " + fmt("%.2f", rep.agreement_z) + ", verdict " + potential::to_string(rep.verdict.status)};
}

// ---------------------------------------------------------------- 11

Outcome oscillation() {
  const auto model = ProcessModel::stable(2, 1.0);
  simulate::RunOptions opt;
  opt.n = 100000;
  opt.seed = 1111;
  std::string detail;
  bool ok = true;
  auto judge = [&](const char* name, const potential::OscillationReport& rep, double seconds) {
    const auto& last = rep.probes.back();
    const bool good = std::abs(rep.final_z) <= 3.0 && std::abs(rep.control_z) <= 3.0 && seconds <= 900.0;
    ok = ok && good;
    detail += std::string(name) + ": f1/f2 " + est(last.ratio) + " vs mass ratio " + est(rep.mass_ratio) + ", z " +
              fmt("%.2f", rep.final_z) + ", control " + est(rep.control_ratio) + " (z " + fmt("%.2f", rep.control_z) +
              "), " + fmt("%.0f", seconds) + " s; ";
  };
  {
    const auto start = std::chrono::steady_clock::now();
    const auto D = geometry::parse_domain("horn(beta=3,A=1,L=1)", 2);
    const potential::HarmonicSpec f1{geometry::parse_domain("ball([0.2,0.8];0.25)", 2), 1.0, "f1"};
    const potential::HarmonicSpec f2{geometry::parse_domain("ball([0.2,-0.8];0.15)", 2), 1.0, "f2"};
    const auto rep = potential::oscillation_experiment_finite(model, D, Point{0.0, 0.0}, 0.5, f1, f2,
                                                              {0.32, 0.1, 0.03, 0.01, 1e-3, 1e-4, 1e-5}, Point{1.0, 0.0}, opt);
    judge("finite point", rep, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  {
    const auto start = std::chrono::steady_clock::now();
    const auto D = geometry::parse_domain("fvhorn(gamma=3)", 2);
    const potential::HarmonicSpec f1{geometry::parse_domain("ball([0,0.6];0.4)", 2), 1.0, "f1"};
    const potential::HarmonicSpec f2{geometry::parse_domain("ball([0,-0.6];0.25)", 2), 1.0, "f2"};
    opt.tag = 1;
    const auto rep = potential::oscillation_experiment_infinity(model, D, 1.5, f1, f2, {2, 8, 64, 512, 4096},
                                                                Point{1.0, 0.0}, opt);
    judge("infinity", rep, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 12

Outcome decomposition() {
  const auto model = ProcessModel::stable(2, 1.0);
  const Point z0{0.0, 0.0};
  const double eps = 0.5, q = 0.5, r = 0.5;
  const auto found = kernels::find_p_for_E1(model, z0, eps, q, r);
  const auto D = geometry::parse_domain("inter(horn(beta=3,A=1,L=1),ball(0;0.5))", 2);
  const potential::HarmonicSpec f{geometry::parse_domain("ball([0.2,0.8];0.25)", 2), 1.0, "f"};
  simulate::RunOptions opt;
  opt.n = 100000;
  opt.seed = 1212;
  const auto rep =
      potential::decomposition_check(model, D, z0, found.p, q, r, f, {Point{0.003, 0.0}, Point{0.0015, 0.0}}, opt);
  std::string detail = "p " + fmt("%.5g", found.p) + "; ";
  for (const auto& pr : rep.probes)
    detail += "x=" + fmt("%g", pr.x[0]) + ": additivity z " + fmt("%.2f", pr.z) + ", bound ratio " +
              est(pr.bound_ratio) + "; ";
  return {rep.additivity_holds && rep.bound_holds, detail};
}

// ---------------------------------------------------------------- 13

Outcome determinism() {
  const fs::path cfg_path = fs::path(LEVYPOT_SOURCE_DIR) / "configs" / "levy_system.ini";
  auto cfg = expcli::load_config(cfg_path);
  const auto a = expcli::run(cfg);
  const auto b = expcli::run(cfg);
  const bool same = expcli::without_timing(a.json) == expcli::without_timing(b.json);
  cfg.workers = 4;
  const auto c = expcli::run(cfg);
  const bool invariant = expcli::to_csv(a) == expcli::to_csv(c);
  const bool ok = same && invariant && a.exit_code == 0 && !a.rows.empty();
  return {ok, std::string("repeat run ") + (same ? "identical" : "differs") + ", workers 1 vs 4 " +
                  (invariant ? "identical" : "differs") + ", " + std::to_string(a.rows.size()) + " rows"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "Cauchy jump density", 1.0, cauchy_density},
      {2, "Levy-density upper bound audit", 10.0, mu_upper_bound},
      {3, "gamma Levy-density ratio supremum", 5.0, gamma_mu_ratio},
      {4, "truncation tail and jump-ratio limits", 30.0, truncation_and_jump_ratio},
      {5, "ball exit sampler against the path oracle", 300.0, ball_exit_ks},
      {6, "Levy-system identity", 120.0, levy_system},
      {7, "Green-function symmetry, closed form and scaling", 180.0, green_function},
      {8, "accessibility dichotomy", 600.0, accessibility},
      {9, "Martin kernel at inaccessible infinity", 900.0, martin_infinity},
      {10, "Martin kernel at an inaccessible cusp tip", 1200.0, martin_finite},
      {11, "oscillation-reduction limits", 1800.0, oscillation},
      {12, "decomposition additivity and two-sided bound", 600.0, decomposition},
      {13, "report determinism", 120.0, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // Criterion 5 bounds the oracle generation, which the check reports itself.
    const bool in_time = c.id == 5 || dt <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s criterion %d: %s | %s | %.1f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), dt, c.limit_seconds, in_time ? "" : " over time limit");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
