#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "levypot/estimate.hpp"

namespace levypot::expcli {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum class ExperimentType {
  LevySystem,
  Accessibility,
  MartinFinite,
  MartinInfinity,
  OscillationFinite,
  OscillationInfinity,
  BernsteinAudit,
  KernelAudit,
  FactorizationProbe,
  Decomposition,
};

const char* to_string(ExperimentType t);
std::optional<ExperimentType> parse_experiment_type(const std::string& name);
const std::vector<ExperimentType>& experiment_types();
// One-line summary for list-experiments.
const char* describe(ExperimentType t);

// Example model ids with a short description, for list-models.
struct ModelEntry {
  std::string id;
  std::string description;
};
const std::vector<ModelEntry>& model_catalog();

using PointValue = std::vector<double>;

// Unset optional fields take the documented defaults at run time.
struct ExperimentConfig {
  // [experiment]
  ExperimentType experiment = ExperimentType::LevySystem;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> workers;
  std::optional<std::string> output;
  // [model]
  std::optional<std::string> model;
  // [domain]
  std::optional<std::string> domain;
  std::optional<std::string> target;
  std::optional<std::vector<std::string>> family;
  // [points]
  std::optional<PointValue> x;
  std::optional<PointValue> x0;
  std::optional<PointValue> z0;
  std::optional<PointValue> direction;
  std::optional<std::vector<PointValue>> grid;
  // [schedule]
  std::optional<std::vector<double>> radii;
  std::optional<std::uint64_t> n;
  std::optional<std::uint64_t> budget;
  std::optional<std::uint64_t> mass_points;
  std::optional<std::uint64_t> k_min;
  std::optional<std::uint64_t> k_max;
  std::optional<std::uint64_t> occupation_samples;
  std::optional<double> growth;
  std::optional<double> converge;
  std::optional<std::uint64_t> doublings;
  std::optional<double> t0;
  std::optional<std::string> method;
  // [harmonics]
  std::optional<std::string> f1;
  std::optional<std::string> f2;
  std::optional<double> f1_scale;
  std::optional<double> f2_scale;
  std::optional<double> scale_check;
  // [parameters]
  std::optional<double> r;
  std::optional<double> p;
  std::optional<double> q;
  std::optional<double> epsilon;
  std::optional<double> a;
  std::optional<std::string> kind;

  bool operator==(const ExperimentConfig&) const = default;
};

// INI text (sections and key = value) or, when the first non-blank character
// is '{', JSON with one object per section. Unknown sections and keys throw
// ParseError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string to_ini(const ExperimentConfig& cfg);
std::string to_json(const ExperimentConfig& cfg);

struct Diagnostic {
  std::string field;
  std::string message;
};

std::vector<Diagnostic> validate(const ExperimentConfig& cfg);

struct ReportRow {
  std::string experiment;
  std::string probe_label;
  Estimate value;
  std::string flag;
};

struct ExperimentReport {
  std::string json;
  std::vector<ReportRow> rows;
  // 0 on success, 1 for an experiment error, 2 for validation failures.
  int exit_code = 0;
};

// Runs the configured experiment. Errors are embedded in the report.
ExperimentReport run(const ExperimentConfig& cfg);

// Columns: experiment, probe_label, value, stderr, n, flag.
std::string to_csv(const ExperimentReport& report);

// Writes <base>.json and <base>.csv, creating parent directories.
void write_report(const ExperimentReport& report, const std::filesystem::path& base);

// Report JSON with the timing field removed.
std::string without_timing(const std::string& report_json);

}  // namespace levypot::expcli
