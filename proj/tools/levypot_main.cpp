#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "levypot/errors.hpp"
#include "levypot/experiment.hpp"

namespace fs = std::filesystem;
using namespace levypot;

namespace {

constexpr const char* kOutDirEnv = "LEVYPOT_OUT_DIR";

// --out wins, then the config's output path, then the environment directory.
fs::path output_base(const std::optional<std::string>& flag, const expcli::ExperimentConfig& cfg,
                     const fs::path& config_path) {
  if (flag) return *flag;
  fs::path base = cfg.output ? fs::path(*cfg.output) : config_path.stem();
  if (base.is_absolute()) return base;
  const char* dir = std::getenv(kOutDirEnv);
  return (dir && *dir ? fs::path(dir) : fs::path("levypot-out")) / base;
}

std::optional<expcli::ExperimentConfig> load(const std::string& path) {
  try {
    return expcli::load_config(path);
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Martin-boundary experiments for jump processes"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> workers;
  std::optional<std::string> out;

  auto* run = app.add_subcommand("run", "run an experiment configuration");
  run->add_option("config", config_path, "configuration file (INI or JSON)")->required();
  run->add_option("--seed", seed, "override the configured seed");
  run->add_option("--workers", workers, "override the configured worker count")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "output base path; writes <out>.json and <out>.csv");

  auto* check = app.add_subcommand("validate", "check a configuration without running it");
  check->add_option("config", config_path, "configuration file (INI or JSON)")->required();

  auto* models = app.add_subcommand("list-models", "print the supported model ids");
  auto* experiments = app.add_subcommand("list-experiments", "print the experiment types");

  CLI11_PARSE(app, argc, argv);

  if (models->parsed()) {
    for (const auto& m : expcli::model_catalog()) std::cout << m.id << "\t" << m.description << "\n";
    return 0;
  }
  if (experiments->parsed()) {
    for (auto t : expcli::experiment_types()) std::cout << expcli::to_string(t) << "\t" << expcli::describe(t) << "\n";
    return 0;
  }

  auto cfg = load(config_path);
  if (!cfg) return 2;

  if (check->parsed()) {
    const auto diags = expcli::validate(*cfg);
    for (const auto& d : diags) std::cout << d.field << ": " << d.message << "\n";
    if (diags.empty()) std::cout << "ok\n";
    return diags.empty() ? 0 : 2;
  }

  if (seed) cfg->seed = *seed;
  if (workers) cfg->workers = *workers;
  const auto report = expcli::run(*cfg);
  const fs::path base = output_base(out, *cfg, config_path);
  try {
    expcli::write_report(report, base);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  std::cout << base.string() << ".json\n" << base.string() << ".csv\n";
  return report.exit_code;
}
