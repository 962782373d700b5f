#include "levypot/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <variant>

#include "levypot/bernstein.hpp"
#include "levypot/errors.hpp"
#include "levypot/format.hpp"
#include "levypot/geometry.hpp"
#include "levypot/kernels.hpp"
#include "levypot/potential.hpp"
#include "levypot/simulate.hpp"

namespace levypot::expcli {

using nlohmann::ordered_json;

namespace {

struct TypeInfo {
  ExperimentType type;
  const char* name;
  const char* summary;
};

constexpr TypeInfo kTypes[] = {
    {ExperimentType::LevySystem, "levy-system", "exit indicator against the per-step Poisson-kernel mass of a target"},
    {ExperimentType::Accessibility, "accessibility", "accessibility verdict of z0 (or infinity) from one or two anchors"},
    {ExperimentType::MartinFinite, "martin-finite", "Green-ratio probes toward a finite boundary point"},
    {ExperimentType::MartinInfinity, "martin-infinity", "Green-ratio probes toward infinity"},
    {ExperimentType::OscillationFinite, "oscillation-finite", "ratio of two harmonic functions toward z0 against j-weighted masses"},
    {ExperimentType::OscillationInfinity, "oscillation-infinity", "ratio of two harmonic functions toward infinity against masses"},
    {ExperimentType::BernsteinAudit, "bernstein-audit", "Levy-density bounds of the model subordinator"},
    {ExperimentType::KernelAudit, "kernel-audit", "jump density, Levy-measure integral and asymptotics"},
    {ExperimentType::FactorizationProbe, "factorization-probe", "empirical factorization constant C(a)"},
    {ExperimentType::Decomposition, "decomposition", "exit decomposition additivity and the two-sided bound"},
};

// ---------------------------------------------------------------- schema

using StrField = std::optional<std::string> ExperimentConfig::*;
using UintField = std::optional<std::uint64_t> ExperimentConfig::*;
using DoubleField = std::optional<double> ExperimentConfig::*;
using ListField = std::optional<std::vector<double>> ExperimentConfig::*;
using PointListField = std::optional<std::vector<PointValue>> ExperimentConfig::*;
using StrListField = std::optional<std::vector<std::string>> ExperimentConfig::*;
using Member = std::variant<StrField, UintField, DoubleField, ListField, PointListField, StrListField>;

struct Field {
  const char* section;
  const char* key;
  Member member;
};

const std::vector<Field>& schema() {
  using C = ExperimentConfig;
  static const std::vector<Field> fields{
      {"experiment", "seed", &C::seed},
      {"experiment", "workers", &C::workers},
      {"experiment", "output", &C::output},
      {"model", "id", &C::model},
      {"domain", "expr", &C::domain},
      {"domain", "target", &C::target},
      {"domain", "family", &C::family},
      {"points", "x", &C::x},
      {"points", "x0", &C::x0},
      {"points", "z0", &C::z0},
      {"points", "direction", &C::direction},
      {"points", "grid", &C::grid},
      {"schedule", "radii", &C::radii},
      {"schedule", "n", &C::n},
      {"schedule", "budget", &C::budget},
      {"schedule", "mass_points", &C::mass_points},
      {"schedule", "k_min", &C::k_min},
      {"schedule", "k_max", &C::k_max},
      {"schedule", "occupation_samples", &C::occupation_samples},
      {"schedule", "growth", &C::growth},
      {"schedule", "converge", &C::converge},
      {"schedule", "doublings", &C::doublings},
      {"schedule", "t0", &C::t0},
      {"schedule", "method", &C::method},
      {"harmonics", "f1", &C::f1},
      {"harmonics", "f2", &C::f2},
      {"harmonics", "f1_scale", &C::f1_scale},
      {"harmonics", "f2_scale", &C::f2_scale},
      {"harmonics", "scale_check", &C::scale_check},
      {"parameters", "r", &C::r},
      {"parameters", "p", &C::p},
      {"parameters", "q", &C::q},
      {"parameters", "epsilon", &C::epsilon},
      {"parameters", "a", &C::a},
      {"parameters", "kind", &C::kind},
  };
  return fields;
}

constexpr const char* kSections[] = {"experiment", "model", "domain", "points", "schedule", "harmonics", "parameters"};

const Field* find_field(const std::string& section, const std::string& key) {
  for (const Field& f : schema())
    if (section == f.section && key == f.key) return &f;
  return nullptr;
}

bool known_section(const std::string& s) {
  for (const char* k : kSections)
    if (s == k) return true;
  return false;
}

// ---------------------------------------------------------------- text values

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& s) {
  const std::string t = trim(s);
  std::size_t pos = 0;
  const double v = std::stod(t, &pos);
  if (pos != t.size()) throw std::invalid_argument("trailing characters");
  return v;
}

std::uint64_t to_uint(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty() || t[0] == '-') throw std::invalid_argument("expected a non-negative integer");
  std::size_t pos = 0;
  const std::uint64_t v = std::stoull(t, &pos);
  if (pos != t.size()) throw std::invalid_argument("trailing characters");
  return v;
}

std::string strip_brackets(const std::string& s) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
  return t;
}

std::vector<double> to_list(const std::string& s) {
  const std::string t = strip_brackets(s);
  std::vector<double> out;
  if (t.empty()) return out;
  for (const std::string& part : split(t, ',')) out.push_back(to_double(part));
  return out;
}

std::vector<PointValue> to_point_list(const std::string& s) {
  std::vector<PointValue> out;
  for (const std::string& part : split(s, ';'))
    if (!part.empty()) out.push_back(to_list(part));
  return out;
}

std::string list_text(const std::vector<double>& v) { return "[" + format_list(v, ',') + "]"; }

std::string point_list_text(const std::vector<PointValue>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += "; ";
    out += list_text(v[i]);
  }
  return out;
}

std::string str_list_text(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += " | ";
    out += v[i];
  }
  return out;
}

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

void set_from_text(ExperimentConfig& cfg, const Field& f, const std::string& text) {
  std::visit(Overload{
                 [&](StrField m) { cfg.*m = trim(text); },
                 [&](UintField m) { cfg.*m = to_uint(text); },
                 [&](DoubleField m) { cfg.*m = to_double(text); },
                 [&](ListField m) { cfg.*m = to_list(text); },
                 [&](PointListField m) { cfg.*m = to_point_list(text); },
                 [&](StrListField m) { cfg.*m = split(text, '|'); },
             },
             f.member);
}

std::optional<std::string> get_text(const ExperimentConfig& cfg, const Field& f) {
  return std::visit(Overload{
                        [&](StrField m) -> std::optional<std::string> { return cfg.*m; },
                        [&](UintField m) -> std::optional<std::string> {
                          if (!(cfg.*m)) return std::nullopt;
                          return std::to_string(*(cfg.*m));
                        },
                        [&](DoubleField m) -> std::optional<std::string> {
                          if (!(cfg.*m)) return std::nullopt;
                          return format_double(*(cfg.*m));
                        },
                        [&](ListField m) -> std::optional<std::string> {
                          if (!(cfg.*m)) return std::nullopt;
                          return list_text(*(cfg.*m));
                        },
                        [&](PointListField m) -> std::optional<std::string> {
                          if (!(cfg.*m)) return std::nullopt;
                          return point_list_text(*(cfg.*m));
                        },
                        [&](StrListField m) -> std::optional<std::string> {
                          if (!(cfg.*m)) return std::nullopt;
                          return str_list_text(*(cfg.*m));
                        },
                    },
                    f.member);
}

// ---------------------------------------------------------------- JSON values

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double json_double(const ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return to_double(j.get<std::string>());
  throw std::invalid_argument("expected a number");
}

std::vector<double> json_list(const ordered_json& j) {
  if (j.is_string()) return to_list(j.get<std::string>());
  if (!j.is_array()) throw std::invalid_argument("expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(json_double(e));
  return out;
}

void set_from_json(ExperimentConfig& cfg, const Field& f, const ordered_json& j) {
  std::visit(Overload{
                 [&](StrField m) {
                   if (!j.is_string()) throw std::invalid_argument("expected a string");
                   cfg.*m = j.get<std::string>();
                 },
                 [&](UintField m) {
                   if (j.is_number_unsigned()) {
                     cfg.*m = j.get<std::uint64_t>();
                   } else if (j.is_string()) {
                     cfg.*m = to_uint(j.get<std::string>());
                   } else {
                     throw std::invalid_argument("expected a non-negative integer");
                   }
                 },
                 [&](DoubleField m) { cfg.*m = json_double(j); },
                 [&](ListField m) { cfg.*m = json_list(j); },
                 [&](PointListField m) {
                   if (j.is_string()) {
                     cfg.*m = to_point_list(j.get<std::string>());
                     return;
                   }
                   if (!j.is_array()) throw std::invalid_argument("expected an array of points");
                   std::vector<PointValue> out;
                   for (const auto& e : j) out.push_back(json_list(e));
                   cfg.*m = out;
                 },
                 [&](StrListField m) {
                   if (!j.is_array()) throw std::invalid_argument("expected an array of strings");
                   std::vector<std::string> out;
                   for (const auto& e : j) {
                     if (!e.is_string()) throw std::invalid_argument("expected an array of strings");
                     out.push_back(e.get<std::string>());
                   }
                   cfg.*m = out;
                 },
             },
             f.member);
}

std::optional<ordered_json> get_json(const ExperimentConfig& cfg, const Field& f) {
  return std::visit(Overload{
                        [&](StrField m) -> std::optional<ordered_json> {
                          if (!(cfg.*m)) return std::nullopt;
                          return ordered_json(*(cfg.*m));
                        },
                        [&](UintField m) -> std::optional<ordered_json> {
                          if (!(cfg.*m)) return std::nullopt;
                          return ordered_json(*(cfg.*m));
                        },
                        [&](DoubleField m) -> std::optional<ordered_json> {
                          if (!(cfg.*m)) return std::nullopt;
                          return number(*(cfg.*m));
                        },
                        [&](ListField m) -> std::optional<ordered_json> {
                          if (!(cfg.*m)) return std::nullopt;
                          ordered_json a = ordered_json::array();
                          for (double v : *(cfg.*m)) a.push_back(number(v));
                          return a;
                        },
                        [&](PointListField m) -> std::optional<ordered_json> {
                          if (!(cfg.*m)) return std::nullopt;
                          ordered_json a = ordered_json::array();
                          for (const auto& p : *(cfg.*m)) {
                            ordered_json q = ordered_json::array();
                            for (double v : p) q.push_back(number(v));
                            a.push_back(q);
                          }
                          return a;
                        },
                        [&](StrListField m) -> std::optional<ordered_json> {
                          if (!(cfg.*m)) return std::nullopt;
                          return ordered_json(*(cfg.*m));
                        },
                    },
                    f.member);
}

ordered_json config_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["experiment"]["type"] = to_string(cfg.experiment);
  for (const char* section : kSections)
    for (const Field& f : schema()) {
      if (std::string(f.section) != section) continue;
      if (auto v = get_json(cfg, f)) j[section][f.key] = *v;
    }
  return j;
}

// Byte offset of `key` inside `[section]`, or of the section header.
std::size_t locate(const std::string& text, const std::string& section, const std::string& key) {
  std::size_t pos = 0, section_at = std::string::npos;
  std::string current;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = trim(text.substr(pos, end - pos));
    if (!line.empty() && line.front() == '[') {
      current = trim(line.substr(1, line.find(']') - 1));
      if (current == section) section_at = pos;
    } else if (current == section && !key.empty()) {
      const auto eq = line.find('=');
      if (eq != std::string::npos && trim(line.substr(0, eq)) == key) return pos + text.substr(pos).find(key);
    }
    pos = end + 1;
  }
  return section_at == std::string::npos ? 0 : section_at;
}

ExperimentType type_from(const std::string& name, std::size_t at) {
  auto t = parse_experiment_type(trim(name));
  if (!t) throw ParseError("unknown experiment type '" + trim(name) + "'", at);
  return *t;
}

ExperimentConfig parse_ini(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::size_t off = 0;
    for (unsigned long line = 1; line < e.line() && off < text.size(); ++line) {
      const std::size_t nl = text.find('\n', off);
      if (nl == std::string::npos) break;
      off = nl + 1;
    }
    throw ParseError(e.message() + " on line " + std::to_string(e.line()), off);
  }
  ExperimentConfig cfg;
  bool have_type = false;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ParseError("key '" + section + "' outside any section", locate(text, "", ""));
    if (!known_section(section)) throw ParseError("unknown section [" + section + "]", locate(text, section, ""));
    for (const auto& [key, node] : body) {
      const std::string value = node.get_value<std::string>();
      const std::size_t at = locate(text, section, key);
      if (section == "experiment" && key == "type") {
        cfg.experiment = type_from(value, at);
        have_type = true;
        continue;
      }
      const Field* f = find_field(section, key);
      if (!f) throw ParseError("unknown key '" + key + "' in section [" + section + "]", at);
      try {
        set_from_text(cfg, *f, value);
      } catch (const std::exception& e) {
        throw ParseError("bad value for " + section + "." + key + ": " + e.what(), at);
      }
    }
  }
  if (!have_type) throw ParseError("missing [experiment] type", 0);
  return cfg;
}

ExperimentConfig parse_json_config(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
  if (!j.is_object()) throw ParseError("configuration must be a JSON object", 0);
  ExperimentConfig cfg;
  bool have_type = false;
  for (const auto& [section, body] : j.items()) {
    const std::size_t at = text.find("\"" + section + "\"");
    if (!known_section(section)) throw ParseError("unknown section '" + section + "'", at);
    if (!body.is_object()) throw ParseError("section '" + section + "' must be an object", at);
    for (const auto& [key, value] : body.items()) {
      const std::size_t kat = text.find("\"" + key + "\"", at);
      if (section == "experiment" && key == "type") {
        if (!value.is_string()) throw ParseError("experiment.type must be a string", kat);
        cfg.experiment = type_from(value.get<std::string>(), kat);
        have_type = true;
        continue;
      }
      const Field* f = find_field(section, key);
      if (!f) throw ParseError("unknown key '" + key + "' in section '" + section + "'", kat);
      try {
        set_from_json(cfg, *f, value);
      } catch (const std::exception& e) {
        throw ParseError("bad value for " + section + "." + key + ": " + e.what(), kat);
      }
    }
  }
  if (!have_type) throw ParseError("missing experiment.type", 0);
  return cfg;
}

// ---------------------------------------------------------------- run helpers

struct Resolved {
  kernels::ProcessModel model;
  std::optional<geometry::Domain> domain;
  int d = 0;
};

Point point(const PointValue& v) { return Point(v); }

simulate::RunOptions run_options(const ExperimentConfig& cfg) {
  simulate::RunOptions o;
  o.n = cfg.n.value_or(100000);
  o.seed = cfg.seed.value_or(1);
  o.workers = static_cast<int>(cfg.workers.value_or(1));
  o.budget = cfg.budget.value_or(10000);
  return o;
}

potential::AccessibilityOptions accessibility_options(const ExperimentConfig& cfg) {
  potential::AccessibilityOptions a;
  if (cfg.k_min) a.k_min = static_cast<int>(*cfg.k_min);
  if (cfg.k_max) a.k_max = static_cast<int>(*cfg.k_max);
  if (cfg.occupation_samples) a.occupation_samples = static_cast<int>(*cfg.occupation_samples);
  if (cfg.growth) a.growth = a.time_ladder.growth = *cfg.growth;
  if (cfg.converge) a.converge = a.time_ladder.converge = *cfg.converge;
  if (cfg.doublings) a.time_ladder.doublings = static_cast<int>(*cfg.doublings);
  if (cfg.t0) a.time_ladder.t0 = *cfg.t0;
  return a;
}

potential::MartinOptions martin_options(const ExperimentConfig& cfg) {
  potential::MartinOptions m;
  if (cfg.method && *cfg.method == "symmetric-exit") m.method = potential::MartinMethod::SymmetricExit;
  if (cfg.occupation_samples) m.occupation_samples = static_cast<int>(*cfg.occupation_samples);
  return m;
}

class Report {
 public:
  explicit Report(const ExperimentConfig& cfg) : cfg_(cfg) {}

  ordered_json estimate(const Estimate& e) const {
    ordered_json j;
    j["value"] = number(e.value);
    j["stderr"] = number(e.std_error);
    j["n"] = e.n;
    j["diverged"] = e.diverged;
    return j;
  }

  ordered_json row(const std::string& label, const Estimate& e, const std::string& flag = "") {
    rows_.push_back({to_string(cfg_.experiment), label, e, flag});
    samples_ += e.n;
    return estimate(e);
  }

  std::vector<ReportRow>& rows() { return rows_; }
  std::uint64_t samples() const { return samples_; }

 private:
  const ExperimentConfig& cfg_;
  std::vector<ReportRow> rows_;
  std::uint64_t samples_ = 0;
};

ordered_json point_json(const Point& p) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(number(p[i]));
  return a;
}

ordered_json verdict_json(Report& rep, const potential::AccessibilityVerdict& v, const std::string& prefix) {
  ordered_json j;
  j["status"] = potential::to_string(v.status);
  j["criterion"] = potential::to_string(v.criterion);
  j["scales"] = ordered_json::array();
  for (double s : v.scales) j["scales"].push_back(number(s));
  j["ladder"] = ordered_json::array();
  for (std::size_t k = 0; k < v.ladder.size(); ++k)
    j["ladder"].push_back(
        rep.row(prefix + "rung=" + format_double(v.scales[k]), v.ladder[k], potential::to_string(v.status)));
  j["growth"] = ordered_json::array();
  for (double g : v.growth) j["growth"].push_back(number(g));
  j["evidence"] = rep.row(prefix + "evidence", v.evidence, v.evidence.diverged ? "diverged" : "finite");
  j["truncated_fraction"] = number(v.truncated_fraction);
  return j;
}

potential::HarmonicSpec harmonic(const std::string& text, double scale, int d, const std::string& label) {
  return {geometry::parse_domain(text, d), scale, label};
}

std::string label_of(const char* key, double v) { return std::string(key) + "=" + format_double(v); }

void run_levy_system(const ExperimentConfig& cfg, const Resolved& rs, Report& rep, ordered_json& out) {
  const auto A = geometry::parse_domain(*cfg.target, rs.d);
  const auto r = simulate::levy_system_check(rs.model, *rs.domain, point(*cfg.x), A, run_options(cfg));
  out["result"]["direct"] = rep.row("direct", r.direct);
  out["result"]["levy"] = rep.row("levy", r.levy);
  out["result"]["difference"] = rep.row("difference", r.difference, std::abs(r.z) <= 3.0 ? "consistent" : "inconsistent");
  out["result"]["truncated"] = r.truncated;
  out["z_scores"]["levy_system"] = number(r.z);
  out["verdicts"]["consistent"] = std::abs(r.z) <= 3.0;
}

void run_accessibility(const ExperimentConfig& cfg, const Resolved& rs, Report& rep, ordered_json& out) {
  const auto opt = run_options(cfg);
  const auto aopt = accessibility_options(cfg);
  std::vector<Point> anchors{point(*cfg.x)};
  if (cfg.x0) anchors.push_back(point(*cfg.x0));
  ordered_json list = ordered_json::array();
  std::optional<potential::Status> first;
  bool stable = true;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    simulate::RunOptions o = opt;
    o.tag = i;
    const auto v = cfg.z0 ? potential::accessibility_finite(rs.model, *rs.domain, point(*cfg.z0), anchors[i], o, aopt)
                          : potential::accessibility_infinity(rs.model, *rs.domain, anchors[i], o, aopt);
    ordered_json a = verdict_json(rep, v, "x" + std::to_string(i) + ":");
    a["x"] = point_json(anchors[i]);
    list.push_back(a);
    if (!first) first = v.status;
    if (*first != v.status) stable = false;
  }
  out["result"]["anchors"] = list;
  out["verdicts"]["status"] = stable ? potential::to_string(*first) : "Undetermined";
  out["verdicts"]["stable_across_anchors"] = stable;
}

void martin_json(Report& rep, const potential::MartinReport& m, ordered_json& out) {
  ordered_json seq = ordered_json::array();
  for (const auto& e : m.ratio_sequence) {
    ordered_json j;
    j["radius"] = number(e.radius);
    j["probe"] = point_json(e.probe);
    j["green_x"] = rep.row(label_of("green_x:radius", e.radius), e.green_x);
    j["green_x0"] = rep.row(label_of("green_x0:radius", e.radius), e.green_x0);
    j["ratio"] = rep.row(label_of("ratio:radius", e.radius), e.ratio, e.unstable ? "unstable" : "");
    j["z"] = number(e.z);
    j["unstable"] = e.unstable;
    seq.push_back(j);
  }
  out["result"]["method"] = potential::to_string(m.method);
  out["result"]["ratio_sequence"] = seq;
  out["result"]["accessibility"] = verdict_json(rep, m.verdict, "anchor:");
  if (m.has_prediction) {
    out["result"]["numerator"] = rep.row("numerator", m.numerator);
    out["result"]["denominator"] = rep.row("denominator", m.denominator);
    out["result"]["predicted_limit"] = rep.row("predicted_limit", m.predicted_limit);
    out["z_scores"]["agreement"] = number(m.agreement_z);
    out["verdicts"]["agreement"] = std::abs(m.agreement_z) <= 3.0;
  }
  out["z_scores"]["cauchy"] = number(m.cauchy_z);
  out["result"]["normalization_residual"] = number(m.normalization_residual);
  out["verdicts"]["status"] = potential::to_string(m.verdict.status);
  out["verdicts"]["cauchy"] = std::abs(m.cauchy_z) <= 3.0;
}

std::optional<Point> direction_of(const ExperimentConfig& cfg) {
  if (cfg.direction) return point(*cfg.direction);
  return std::nullopt;
}

void run_martin(const ExperimentConfig& cfg, const Resolved& rs, Report& rep, ordered_json& out) {
  const auto opt = run_options(cfg);
  const auto mopt = martin_options(cfg);
  const auto aopt = accessibility_options(cfg);
  const auto m = cfg.experiment == ExperimentType::MartinFinite
                     ? potential::martin_limit_finite(rs.model, *rs.domain, point(*cfg.x), point(*cfg.x0),
                                                      point(*cfg.z0), *cfg.radii, opt, mopt, direction_of(cfg), aopt)
                     : potential::martin_limit_infinity(rs.model, *rs.domain, point(*cfg.x), point(*cfg.x0),
                                                        *cfg.radii, opt, mopt, direction_of(cfg), aopt);
  martin_json(rep, m, out);
}

void run_oscillation(const ExperimentConfig& cfg, const Resolved& rs, Report& rep, ordered_json& out) {
  const auto opt = run_options(cfg);
  potential::OscillationOptions oopt;
  if (cfg.mass_points) oopt.mass_points = *cfg.mass_points;
  if (cfg.scale_check) oopt.scale_check = *cfg.scale_check;
  const auto f1 = harmonic(*cfg.f1, cfg.f1_scale.value_or(1.0), rs.d, "f1");
  const auto f2 = harmonic(*cfg.f2, cfg.f2_scale.value_or(1.0), rs.d, "f2");
  const Point dir = cfg.direction ? point(*cfg.direction) : Point::basis(rs.d, 0);
  const bool finite = cfg.experiment == ExperimentType::OscillationFinite;
  const auto o = finite ? potential::oscillation_experiment_finite(rs.model, *rs.domain, point(*cfg.z0), *cfg.r, f1,
                                                                   f2, *cfg.radii, dir, opt, oopt)
                        : potential::oscillation_experiment_infinity(rs.model, *rs.domain, *cfg.r, f1, f2, *cfg.radii,
                                                                     dir, opt, oopt);
  ordered_json probes = ordered_json::array();
  for (const auto& p : o.probes) {
    ordered_json j;
    j["label"] = number(p.label);
    j["x"] = point_json(p.x);
    j["f1"] = rep.row(label_of("f1:s", p.label), p.f1);
    j["f2"] = rep.row(label_of("f2:s", p.label), p.f2);
    j["ratio"] = rep.row(label_of("ratio:s", p.label), p.ratio);
    j["z"] = number(p.z);
    probes.push_back(j);
  }
  out["result"]["probes"] = probes;
  out["result"]["mass1"] = rep.row("mass1", o.mass1);
  out["result"]["mass2"] = rep.row("mass2", o.mass2);
  out["result"]["mass_ratio"] = rep.row("mass_ratio", o.mass_ratio);
  out["result"]["control_ratio"] = rep.row("control_ratio", o.control_ratio);
  out["result"]["ratio_of_ratios"] = rep.row("ratio_of_ratios", o.ratio_of_ratios);
  if (finite) {
    ordered_json lam = ordered_json::array();
    for (std::size_t k = 0; k < o.lambda_ladder.size(); ++k) {
      ordered_json j;
      j["radius"] = number(o.lambda_radii[k]);
      j["lambda"] = rep.row(label_of("lambda:p", o.lambda_radii[k]), o.lambda_ladder[k]);
      lam.push_back(j);
    }
    out["result"]["lambda_ladder"] = lam;
    out["verdicts"]["lambda_monotone"] = o.lambda_monotone;
  }
  out["z_scores"]["final"] = number(o.final_z);
  out["z_scores"]["control"] = number(o.control_z);
  out["verdicts"]["final_agreement"] = std::abs(o.final_z) <= 3.0;
  out["verdicts"]["control_agreement"] = std::abs(o.control_z) <= 3.0;
}

void run_decomposition(const ExperimentConfig& cfg, const Resolved& rs, Report& rep, ordered_json& out) {
  const auto opt = run_options(cfg);
  potential::DecompositionOptions dopt;
  if (cfg.epsilon) dopt.epsilon = *cfg.epsilon;
  if (cfg.mass_points) dopt.mass_points = *cfg.mass_points;
  const Point z0 = point(*cfg.z0);
  double p = 0.0;
  if (cfg.p) {
    p = *cfg.p;
  } else {
    const auto found = kernels::find_p_for_E1(rs.model, z0, dopt.epsilon, *cfg.q, *cfg.r);
    p = found.p;
    out["result"]["p_search"]["worst_ratio"] = number(found.worst_ratio);
    out["result"]["p_search"]["probes"] = found.probes;
  }
  std::vector<Point> xs;
  for (const auto& v : *cfg.grid) xs.push_back(point(v));
  const auto f = harmonic(*cfg.f1, cfg.f1_scale.value_or(1.0), rs.d, "f");
  const auto d = potential::decomposition_check(rs.model, *rs.domain, z0, p, *cfg.q, *cfg.r, f, xs, opt, dopt);
  out["result"]["p"] = number(d.p);
  out["result"]["q"] = number(d.q);
  out["result"]["r"] = number(d.r);
  out["result"]["epsilon"] = number(d.epsilon);
  out["result"]["lambda"] = rep.row("lambda", d.lambda);
  ordered_json probes = ordered_json::array();
  for (std::size_t k = 0; k < d.probes.size(); ++k) {
    const auto& pr = d.probes[k];
    const std::string tag = "probe" + std::to_string(k) + ":";
    ordered_json j;
    j["x"] = point_json(pr.x);
    j["f_direct"] = rep.row(tag + "f_direct", pr.f_direct);
    j["f_part"] = rep.row(tag + "f_part", pr.f_part);
    j["f_tilde"] = rep.row(tag + "f_tilde", pr.f_tilde);
    j["sum"] = rep.row(tag + "sum", pr.sum);
    j["z"] = number(pr.z);
    j["f_tilde_8"] = rep.row(tag + "f_tilde_8", pr.f_tilde_8);
    j["exit_time_8"] = rep.row(tag + "exit_time_8", pr.exit_time_8);
    j["bound_ratio"] = rep.row(tag + "bound_ratio", pr.bound_ratio, pr.bound_holds ? "within" : "outside");
    j["bound_holds"] = pr.bound_holds;
    probes.push_back(j);
  }
  out["result"]["probes"] = probes;
  out["z_scores"]["max_abs_additivity"] = number(d.max_abs_z);
  out["verdicts"]["additivity"] = d.additivity_holds;
  out["verdicts"]["bound"] = d.bound_holds;
}

void run_factorization(const ExperimentConfig& cfg, const Resolved& rs, Report& rep, ordered_json& out) {
  const auto opt = run_options(cfg);
  potential::FactorizationOptions fopt;
  if (cfg.mass_points) fopt.mass_points = *cfg.mass_points;
  std::vector<geometry::Domain> domains;
  if (cfg.family) {
    for (const auto& text : *cfg.family) domains.push_back(geometry::parse_domain(text, rs.d));
  } else {
    domains.push_back(*rs.domain);
  }
  std::vector<potential::HarmonicSpec> hs{harmonic(*cfg.f1, cfg.f1_scale.value_or(1.0), rs.d, "f1")};
  if (cfg.f2) hs.push_back(harmonic(*cfg.f2, cfg.f2_scale.value_or(1.0), rs.d, "f2"));
  std::vector<Point> xs;
  for (const auto& v : *cfg.grid) xs.push_back(point(v));
  const auto kind = cfg.kind.value_or("F1") == "F2" ? potential::FactorizationKind::F2 : potential::FactorizationKind::F1;
  const auto f = potential::factorization_probe(rs.model, kind, domains, point(*cfg.z0), *cfg.r, *cfg.a, hs, xs, opt, fopt);
  ordered_json entries = ordered_json::array();
  for (std::size_t k = 0; k < f.entries.size(); ++k) {
    const auto& e = f.entries[k];
    const std::string tag = "entry" + std::to_string(k) + ":";
    ordered_json j;
    j["domain"] = e.domain;
    j["harmonic"] = e.harmonic;
    j["x"] = point_json(e.x);
    j["f"] = rep.row(tag + "f", e.f);
    j["factor"] = rep.row(tag + "factor", e.factor);
    j["deviation"] = number(e.deviation);
    entries.push_back(j);
  }
  out["result"]["kind"] = kind == potential::FactorizationKind::F1 ? "F1" : "F2";
  out["result"]["a"] = number(f.a);
  out["result"]["r"] = number(f.r);
  out["result"]["entries"] = entries;
  out["result"]["c_hat"] = ordered_json::array();
  for (double c : f.c_hat) out["result"]["c_hat"].push_back(number(c));
  out["result"]["c_hat_max"] = number(f.c_hat_max);
  out["verdicts"]["bounded"] = std::isfinite(f.c_hat_max);
}

bernstein::CompleteBernsteinFunction subordinator_of(const kernels::ProcessModel& model) {
  if (const auto* f = model.subordinator()) return *f;
  if (model.is_stable()) return bernstein::make_stable_subordinator(model.alpha() / 2.0);
  throw UnsupportedModelError("model '" + model.id() + "' has no subordinator");
}

Estimate quad_estimate(const QuadResult& q) { return {q.value, q.error, q.evaluations, false}; }

ordered_json scaling_json(const bernstein::ScalingReport& s) {
  ordered_json j;
  j["holds"] = s.holds;
  j["margin"] = number(s.margin);
  j["grid_points"] = s.grid_points;
  j["grid_note"] = s.grid_note;
  if (s.witness) {
    j["witness"] = ordered_json::array();
    for (double w : *s.witness) j["witness"].push_back(number(w));
  }
  return j;
}

void run_bernstein_audit(const ExperimentConfig& /*cfg*/, const Resolved& rs, Report& rep, ordered_json& out) {
  const auto f = subordinator_of(rs.model);
  out["result"]["subordinator"] = f.name();
  ordered_json lap = ordered_json::array();
  for (double lambda : {0.5, 1.0, 2.0}) {
    ordered_json j;
    j["lambda"] = lambda;
    j["phi"] = number(f.phi(lambda));
    if (f.has_mu()) {
      const auto q = bernstein::laplace_exponent_from_mu(f, lambda);
      j["phi_from_mu"] = rep.row(label_of("phi_from_mu:lambda", lambda), quad_estimate(q));
      j["relative_error"] = number(std::abs(q.value - f.phi(lambda)) / f.phi(lambda));
    }
    lap.push_back(j);
  }
  out["result"]["laplace_exponent"] = lap;
  if (!f.has_mu()) {
    out["verdicts"]["mu_available"] = false;
    return;
  }
  const auto bound = bernstein::check_mu_upper_bound(f, log_grid(1e-3, 1e3, 400));
  out["result"]["mu_upper_bound"] = scaling_json(bound);
  ordered_json sup = ordered_json::array();
  for (double delta : {0.1, 0.01}) {
    ordered_json j;
    j["t0"] = 1.0;
    j["delta"] = delta;
    j["mu_ratio_sup"] = number(bernstein::mu_ratio_sup(f, 1.0, delta));
    sup.push_back(j);
  }
  out["result"]["mu_ratio_sup"] = sup;
  const auto lower = bernstein::check_mu_exponential_lower_bound(f);
  out["result"]["exponential_lower_bound"] = {
      {"c1", number(lower.c1)}, {"c2", number(lower.c2)}, {"c", number(lower.c)}, {"holds", lower.holds}};
  out["verdicts"]["mu_upper_bound"] = bound.holds;
  out["verdicts"]["exponential_lower_bound"] = lower.holds;
}

void run_kernel_audit(const ExperimentConfig& cfg, const Resolved& rs, Report& rep, ordered_json& out) {
  const std::vector<double> radii = cfg.radii.value_or(std::vector<double>{0.5, 1.0, 2.0, 10.0});
  ordered_json js = ordered_json::array();
  const auto* sub = rs.model.subordinator();
  for (double r : radii) {
    ordered_json j;
    j["r"] = number(r);
    j["jump_density"] = number(rs.model.jump_density(r));
    if (sub) j["subordination"] = rep.row(label_of("j:r", r), quad_estimate(kernels::subordinate_jump_density(*sub, rs.d, r)));
    if (rs.model.is_stable()) j["closed_form"] = number(kernels::stable_jump_density(rs.d, rs.model.alpha(), r));
    js.push_back(j);
  }
  out["result"]["jump_density"] = js;
  out["result"]["levy_measure_integral"] = rep.row("levy_measure_integral", quad_estimate(kernels::levy_measure_integral(rs.model)));
  if (sub) {
    const double tail = kernels::truncation_tail_sup(*sub, rs.d, 1e-3, 0.5);
    out["result"]["truncation_tail_sup"] = {{"eta", 1e-3}, {"r0", 0.5}, {"value", number(tail)}};
  }
  if (rs.model.isotropic() && radii.size() >= 3) {
    const auto a = kernels::check_j_asymptotics(rs.model, radii);
    out["result"]["asymptotics"] = {{"spread", number(a.spread)}, {"tolerance", number(a.tolerance)}};
    out["verdicts"]["asymptotics_stabilize"] = a.stabilizes;
  }
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const ParameterError*>(&e)) return "ParameterError";
  if (dynamic_cast<const NumericError*>(&e)) return "NumericError";
  if (dynamic_cast<const UnsupportedModelError*>(&e)) return "UnsupportedModelError";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const GeometryError*>(&e)) return "GeometryError";
  if (dynamic_cast<const SingularityError*>(&e)) return "SingularityError";
  if (dynamic_cast<const UnstableRatioError*>(&e)) return "UnstableRatioError";
  if (dynamic_cast<const DegenerateExperimentError*>(&e)) return "DegenerateExperimentError";
  if (dynamic_cast<const SearchFailure*>(&e)) return "SearchFailure";
  return "Error";
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

// Required fields per experiment type.
std::vector<std::pair<const char*, bool>> required(const ExperimentConfig& c) {
  using T = ExperimentType;
  switch (c.experiment) {
    case T::LevySystem:
      return {{"domain.expr", c.domain.has_value()}, {"domain.target", c.target.has_value()}, {"points.x", c.x.has_value()}};
    case T::Accessibility:
      return {{"domain.expr", c.domain.has_value()}, {"points.x", c.x.has_value()}};
    case T::MartinFinite:
      return {{"domain.expr", c.domain.has_value()}, {"points.x", c.x.has_value()}, {"points.x0", c.x0.has_value()},
              {"points.z0", c.z0.has_value()},       {"schedule.radii", c.radii.has_value()}};
    case T::MartinInfinity:
      return {{"domain.expr", c.domain.has_value()}, {"points.x", c.x.has_value()}, {"points.x0", c.x0.has_value()},
              {"schedule.radii", c.radii.has_value()}};
    case T::OscillationFinite:
      return {{"domain.expr", c.domain.has_value()}, {"points.z0", c.z0.has_value()}, {"harmonics.f1", c.f1.has_value()},
              {"harmonics.f2", c.f2.has_value()},    {"parameters.r", c.r.has_value()}, {"schedule.radii", c.radii.has_value()}};
    case T::OscillationInfinity:
      return {{"domain.expr", c.domain.has_value()}, {"harmonics.f1", c.f1.has_value()}, {"harmonics.f2", c.f2.has_value()},
              {"parameters.r", c.r.has_value()},     {"schedule.radii", c.radii.has_value()}};
    case T::BernsteinAudit:
    case T::KernelAudit:
      return {};
    case T::FactorizationProbe:
      return {{"domain.expr or domain.family", c.domain.has_value() || c.family.has_value()},
              {"points.z0", c.z0.has_value()},
              {"points.grid", c.grid.has_value()},
              {"harmonics.f1", c.f1.has_value()},
              {"parameters.r", c.r.has_value()},
              {"parameters.a", c.a.has_value()}};
    case T::Decomposition:
      return {{"domain.expr", c.domain.has_value()}, {"points.z0", c.z0.has_value()}, {"points.grid", c.grid.has_value()},
              {"harmonics.f1", c.f1.has_value()},    {"parameters.r", c.r.has_value()}, {"parameters.q", c.q.has_value()}};
  }
  return {};
}

bool strictly_monotone(const std::vector<double>& v) {
  if (v.size() < 2) return true;
  bool up = true, down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) up = false;
    if (!(v[i] < v[i - 1])) down = false;
  }
  return up || down;
}

}  // namespace

// ---------------------------------------------------------------- public API

const char* to_string(ExperimentType t) {
  for (const auto& info : kTypes)
    if (info.type == t) return info.name;
  return "unknown";
}

std::optional<ExperimentType> parse_experiment_type(const std::string& name) {
  for (const auto& info : kTypes)
    if (name == info.name) return info.type;
  return std::nullopt;
}

const std::vector<ExperimentType>& experiment_types() {
  static const std::vector<ExperimentType> all = [] {
    std::vector<ExperimentType> v;
    for (const auto& info : kTypes) v.push_back(info.type);
    return v;
  }();
  return all;
}

const char* describe(ExperimentType t) {
  for (const auto& info : kTypes)
    if (info.type == t) return info.summary;
  return "";
}

const std::vector<ModelEntry>& model_catalog() {
  static const std::vector<ModelEntry> models{
      {"stable:d=<d>:alpha=<a>", "isotropic alpha-stable process, 0 < alpha < 2 (exact sphere-walk samplers)"},
      {"sbm:d=<d>:stable:<beta>", "subordinate Brownian motion, beta-stable subordinator"},
      {"sbm:d=<d>:gamma", "subordinate Brownian motion, gamma subordinator (variance gamma)"},
      {"sbm:d=<d>:geo:<a>", "subordinate Brownian motion, geometric a-stable subordinator"},
      {"sbm:d=<d>:iter-geo:<n>:<a>", "subordinate Brownian motion, n-fold iterated geometric subordinator"},
      {"aniso:<isotropic id>:k=cosine", "anisotropic jump density k(theta) j(r) with k = 2 + theta_1"},
      {"aniso:<isotropic id>:k=uniform", "anisotropic wrapper with k = 1"},
  };
  return models;
}

ExperimentConfig parse_config(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json_config(text);
  return parse_ini(text);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read configuration '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str());
}

std::string to_ini(const ExperimentConfig& cfg) {
  std::string out = "[experiment]\ntype = " + std::string(to_string(cfg.experiment)) + "\n";
  for (const char* section : kSections) {
    std::string body;
    for (const Field& f : schema()) {
      if (std::string(f.section) != section) continue;
      if (auto v = get_text(cfg, f)) body += std::string(f.key) + " = " + *v + "\n";
    }
    if (std::string(section) == "experiment") {
      out += body;
    } else if (!body.empty()) {
      out += "\n[" + std::string(section) + "]\n" + body;
    }
  }
  return out;
}

std::string to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
  std::vector<Diagnostic> diags;
  auto add = [&](std::string field, std::string msg) { diags.push_back({std::move(field), std::move(msg)}); };
  for (const auto& [field, present] : required(cfg))
    if (!present) add(field, "required for experiment " + std::string(to_string(cfg.experiment)));
  if (cfg.workers && *cfg.workers == 0) add("experiment.workers", "must be at least 1");
  if (cfg.n && *cfg.n == 0) add("schedule.n", "must be positive");
  if (cfg.method && *cfg.method != "occupation" && *cfg.method != "symmetric-exit")
    add("schedule.method", "must be 'occupation' or 'symmetric-exit'");
  if (cfg.kind && *cfg.kind != "F1" && *cfg.kind != "F2") add("parameters.kind", "must be 'F1' or 'F2'");
  if (cfg.radii) {
    if (cfg.radii->empty()) add("schedule.radii", "must not be empty");
    for (double r : *cfg.radii)
      if (!(r > 0.0)) add("schedule.radii", "radii must be positive");
    if (!strictly_monotone(*cfg.radii)) add("schedule.radii", "radii not monotone");
  }
  if (!cfg.model) {
    add("model.id", "required");
    return diags;
  }
  std::optional<kernels::ProcessModel> model;
  try {
    model = kernels::ProcessModel::parse(*cfg.model);
  } catch (const std::exception& e) {
    add("model.id", e.what());
    return diags;
  }
  const int d = model->dim();
  std::optional<geometry::Domain> D;
  auto parse_dom = [&](const std::optional<std::string>& text, const char* field) -> std::optional<geometry::Domain> {
    if (!text) return std::nullopt;
    try {
      return geometry::parse_domain(*text, d);
    } catch (const std::exception& e) {
      add(field, e.what());
      return std::nullopt;
    }
  };
  D = parse_dom(cfg.domain, "domain.expr");
  parse_dom(cfg.target, "domain.target");
  parse_dom(cfg.f1, "harmonics.f1");
  parse_dom(cfg.f2, "harmonics.f2");
  std::vector<geometry::Domain> family;
  if (cfg.family)
    for (const auto& text : *cfg.family)
      if (auto f = parse_dom(text, "domain.family")) family.push_back(*f);
  auto check_dim = [&](const std::optional<PointValue>& p, const char* field) {
    if (p && static_cast<int>(p->size()) != d) {
      add(field, "dimension " + std::to_string(p->size()) + " does not match the model dimension " + std::to_string(d));
      return false;
    }
    return p.has_value();
  };
  const bool has_x = check_dim(cfg.x, "points.x");
  const bool has_x0 = check_dim(cfg.x0, "points.x0");
  const bool has_z0 = check_dim(cfg.z0, "points.z0");
  check_dim(cfg.direction, "points.direction");
  bool grid_ok = true;
  if (cfg.grid)
    for (const auto& g : *cfg.grid)
      if (static_cast<int>(g.size()) != d) grid_ok = false;
  if (!grid_ok) add("points.grid", "grid point dimension does not match the model dimension");
  if (D) {
    if (has_x && !D->contains(Point(*cfg.x))) add("points.x", "probe outside domain");
    if (has_x0 && !D->contains(Point(*cfg.x0))) add("points.x0", "probe outside domain");
    const bool finite_point = cfg.experiment == ExperimentType::MartinFinite ||
                              cfg.experiment == ExperimentType::OscillationFinite ||
                              cfg.experiment == ExperimentType::FactorizationProbe ||
                              (cfg.experiment == ExperimentType::Accessibility && cfg.z0);
    if (has_z0 && finite_point && !D->on_boundary(Point(*cfg.z0), 1e-6)) add("points.z0", "z0 not on the boundary");
    if (cfg.grid && grid_ok && cfg.experiment == ExperimentType::Decomposition)
      for (const auto& g : *cfg.grid)
        if (!D->contains(Point(g))) add("points.grid", "probe outside domain");
  }
  if (cfg.experiment == ExperimentType::FactorizationProbe && cfg.a && cfg.kind.value_or("F1") == "F1" &&
      !(*cfg.a > 0.5 && *cfg.a < 1.0))
    add("parameters.a", "F1 probes need a in (1/2, 1)");
  if (cfg.experiment == ExperimentType::FactorizationProbe && cfg.a && cfg.kind.value_or("F1") == "F2" &&
      !(*cfg.a > 1.0 && *cfg.a < 2.0))
    add("parameters.a", "F2 probes need a in (1, 2)");
  if (cfg.experiment == ExperimentType::Decomposition && cfg.q && !(*cfg.q > 0.0 && *cfg.q < 1.0))
    add("parameters.q", "must lie in (0, 1)");
  return diags;
}

ExperimentReport run(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport result;
  Report rep(cfg);
  ordered_json out;
  out["experiment"] = to_string(cfg.experiment);
  out["library_version"] = kLibraryVersion;
  out["seed"] = cfg.seed.value_or(1);
  out["config"] = config_json(cfg);
  out["dual_process"] = "symmetric model; dual objects coincide with the originals";
  out["result"] = ordered_json::object();
  out["verdicts"] = ordered_json::object();
  out["z_scores"] = ordered_json::object();

  const auto diags = validate(cfg);
  if (!diags.empty()) {
    ordered_json list = ordered_json::array();
    for (const auto& d : diags) list.push_back({{"field", d.field}, {"message", d.message}});
    out["diagnostics"] = list;
    result.exit_code = 2;
  } else {
    try {
      Resolved rs{kernels::ProcessModel::parse(*cfg.model), std::nullopt, 0};
      rs.d = rs.model.dim();
      if (cfg.domain) rs.domain = geometry::parse_domain(*cfg.domain, rs.d);
      out["model"] = rs.model.id();
      if (rs.domain) out["domain"] = rs.domain->to_string();
      switch (cfg.experiment) {
        case ExperimentType::LevySystem: run_levy_system(cfg, rs, rep, out); break;
        case ExperimentType::Accessibility: run_accessibility(cfg, rs, rep, out); break;
        case ExperimentType::MartinFinite:
        case ExperimentType::MartinInfinity: run_martin(cfg, rs, rep, out); break;
        case ExperimentType::OscillationFinite:
        case ExperimentType::OscillationInfinity: run_oscillation(cfg, rs, rep, out); break;
        case ExperimentType::BernsteinAudit: run_bernstein_audit(cfg, rs, rep, out); break;
        case ExperimentType::KernelAudit: run_kernel_audit(cfg, rs, rep, out); break;
        case ExperimentType::FactorizationProbe: run_factorization(cfg, rs, rep, out); break;
        case ExperimentType::Decomposition: run_decomposition(cfg, rs, rep, out); break;
      }
    } catch (const std::exception& e) {
      out["error"] = {{"type", error_kind(e)}, {"message", e.what()}};
      result.exit_code = 1;
    }
  }
  ordered_json rows = ordered_json::array();
  for (const auto& r : rep.rows())
    rows.push_back({{"probe_label", r.probe_label},
                    {"value", number(r.value.value)},
                    {"stderr", number(r.value.std_error)},
                    {"n", r.value.n},
                    {"flag", r.flag}});
  out["estimates"] = rows;
  out["samples"] = rep.samples();
  out["exit_code"] = result.exit_code;
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out["timing"] = {{"timestamp", utc_timestamp()}, {"wall_clock_s", wall}};
  result.json = out.dump(2) + "\n";
  result.rows = std::move(rep.rows());
  return result;
}

std::string to_csv(const ExperimentReport& report) {
  std::string out = "experiment,probe_label,value,stderr,n,flag\n";
  for (const auto& r : report.rows) {
    out += csv_field(r.experiment) + "," + csv_field(r.probe_label) + "," + format_double(r.value.value) + "," +
           format_double(r.value.std_error) + "," + std::to_string(r.value.n) + "," + csv_field(r.flag) + "\n";
  }
  return out;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& base) {
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ParameterError("cannot write '" + p.string() + "'");
    f << text;
  };
  std::filesystem::path json = base, csv = base;
  json += ".json";
  csv += ".csv";
  write(json, report.json);
  write(csv, to_csv(report));
}

std::string without_timing(const std::string& report_json) {
  ordered_json j = ordered_json::parse(report_json);
  j.erase("timing");
  return j.dump(2);
}

}  // namespace levypot::expcli
