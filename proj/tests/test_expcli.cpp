#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "levypot/errors.hpp"
#include "levypot/experiment.hpp"

using namespace levypot;
using namespace levypot::expcli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kLevyIni = R"([experiment]
type = levy-system
seed = 7
workers = 1

[model]
id = stable:d=2:alpha=1.0

[domain]
expr = ball(0;1)
target = diff(ball(0;3),ball(0;2))

[points]
x = [0.3, 0.2]

[schedule]
n = 4000
budget = 10000
)";

bool has_diagnostic(const std::vector<Diagnostic>& ds, const std::string& field, const std::string& msg) {
  for (const auto& d : ds)
    if (d.field == field && d.message.find(msg) != std::string::npos) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "levypot_test_expcli";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Config, IniJsonRoundTrip) {
  const ExperimentConfig a = parse_config(kLevyIni);
  EXPECT_EQ(a.experiment, ExperimentType::LevySystem);
  EXPECT_EQ(a.seed, 7u);
  ASSERT_TRUE(a.x.has_value());
  EXPECT_EQ(*a.x, (PointValue{0.3, 0.2}));
  EXPECT_EQ(parse_config(to_ini(a)), a);
  EXPECT_EQ(parse_config(to_json(a)), a);
  EXPECT_EQ(parse_config(to_ini(parse_config(to_json(a)))), a);
}

TEST(Config, EveryTypeNameParses) {
  for (auto t : experiment_types()) {
    EXPECT_EQ(parse_experiment_type(to_string(t)), t);
    EXPECT_GT(std::string(describe(t)).size(), 0u);
  }
  EXPECT_FALSE(parse_experiment_type("nonsense").has_value());
}

TEST(Config, UnknownKeysAndSectionsRejected) {
  EXPECT_THROW(parse_config(kLevyIni + "colour = red\n"), ParseError);
  EXPECT_THROW(parse_config(kLevyIni + "[extra]\nk = 1\n"), ParseError);
  EXPECT_THROW(parse_config(R"({"experiment": {"type": "levy-system", "bogus": 1}})"), ParseError);
  EXPECT_THROW(parse_config(R"({"experiment": {"seed": 1}})"), ParseError);
}

TEST(Config, ParseErrorOffsets) {
  const std::string text = kLevyIni + "colour = red\n";
  try {
    parse_config(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), text.find("colour"));
  }
  const std::string bad_json = R"({"experiment": {"type": "levy-system",}})";
  try {
    parse_config(bad_json);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), bad_json.find('}'));
  }
  const std::string bad_value = "[experiment]\ntype = levy-system\nseed = many\n";
  try {
    parse_config(bad_value);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), bad_value.find("seed"));
  }
}

TEST(Validate, CleanConfigHasNoDiagnostics) { EXPECT_TRUE(validate(parse_config(kLevyIni)).empty()); }

TEST(Validate, ReportsDomainAndScheduleProblems) {
  ExperimentConfig c = parse_config(kLevyIni);
  c.x = PointValue{1.5, 0.0};
  EXPECT_TRUE(has_diagnostic(validate(c), "points.x", "probe outside domain"));
  c = parse_config(kLevyIni);
  c.radii = std::vector<double>{2.0, 8.0, 4.0};
  EXPECT_TRUE(has_diagnostic(validate(c), "schedule.radii", "radii not monotone"));
  c = parse_config(kLevyIni);
  c.x = PointValue{0.1, 0.1, 0.1};
  EXPECT_TRUE(has_diagnostic(validate(c), "points.x", "dimension"));
  c = parse_config(kLevyIni);
  c.model = "stable:d=2:alpha=3.0";
  EXPECT_TRUE(has_diagnostic(validate(c), "model.id", ""));
  c = parse_config(kLevyIni);
  c.domain = "ball(0;1";
  EXPECT_TRUE(has_diagnostic(validate(c), "domain.expr", ""));
  c = parse_config(kLevyIni);
  c.target.reset();
  EXPECT_TRUE(has_diagnostic(validate(c), "domain.target", "required"));
}

TEST(Run, ReportCarriesZScoreAndRows) {
  const auto rep = run(parse_config(kLevyIni));
  ASSERT_EQ(rep.exit_code, 0) << rep.json;
  const json j = json::parse(rep.json);
  EXPECT_EQ(j["experiment"], "levy-system");
  EXPECT_TRUE(j["z_scores"]["levy_system"].is_number());
  EXPECT_LT(std::abs(j["z_scores"]["levy_system"].get<double>()), 4.0);
  EXPECT_TRUE(j.contains("timing"));
  EXPECT_EQ(j["estimates"].size(), rep.rows.size());
  EXPECT_FALSE(rep.rows.empty());
}

TEST(Run, DeterministicAndWorkerInvariant) {
  ExperimentConfig c = parse_config(kLevyIni);
  const auto a = run(c);
  const auto b = run(c);
  c.workers = 3;
  const auto w = run(c);
  EXPECT_EQ(without_timing(a.json), without_timing(b.json));
  const json ja = json::parse(without_timing(a.json)), jw = json::parse(without_timing(w.json));
  EXPECT_EQ(ja["estimates"], jw["estimates"]);
  EXPECT_EQ(ja["z_scores"], jw["z_scores"]);
  EXPECT_EQ(to_csv(a), to_csv(w));
}

TEST(Run, CsvMatchesJsonEstimates) {
  const auto rep = run(parse_config(kLevyIni));
  const json rows = json::parse(rep.json)["estimates"];
  std::istringstream csv(to_csv(rep));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "experiment,probe_label,value,stderr,n,flag");
  std::size_t i = 0;
  while (std::getline(csv, line)) {
    ASSERT_LT(i, rows.size());
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    ASSERT_GE(cols.size(), 5u) << line;
    EXPECT_EQ(cols[1], rows[i]["probe_label"].get<std::string>());
    EXPECT_DOUBLE_EQ(std::stod(cols[2]), rows[i]["value"].get<double>());
    EXPECT_DOUBLE_EQ(std::stod(cols[3]), rows[i]["stderr"].get<double>());
    EXPECT_EQ(std::stoull(cols[4]), rows[i]["n"].get<std::uint64_t>());
    ++i;
  }
  EXPECT_EQ(i, rows.size());
}

TEST(Run, ValidationFailureExitsWithTwo) {
  ExperimentConfig c = parse_config(kLevyIni);
  c.x = PointValue{1.5, 0.0};
  const auto rep = run(c);
  EXPECT_EQ(rep.exit_code, 2);
  EXPECT_TRUE(json::parse(rep.json).contains("diagnostics"));
}

TEST(Run, RuntimeErrorExitsWithOne) {
  ExperimentConfig c = parse_config(kLevyIni);
  // Target overlaps the domain, which the Levy-system check rejects at run time.
  c.target = "ball(0;2)";
  const auto rep = run(c);
  EXPECT_EQ(rep.exit_code, 1) << rep.json;
  EXPECT_TRUE(json::parse(rep.json).contains("error"));
}

TEST(Run, WritesJsonAndCsv) {
  const auto rep = run(parse_config(kLevyIni));
  const fs::path base = scratch("nested/levy");
  fs::remove_all(base.parent_path());
  write_report(rep, base);
  std::ifstream j(base.string() + ".json"), c(base.string() + ".csv");
  std::stringstream js, cs;
  js << j.rdbuf();
  cs << c.rdbuf();
  EXPECT_EQ(js.str(), rep.json);
  EXPECT_EQ(cs.str(), to_csv(rep));
}

TEST(Cli, ExitCodes) {
  const fs::path cfg = scratch("cli.ini");
  std::ofstream(cfg) << kLevyIni;
  const fs::path out = scratch("cli_out");
  auto status = [](const std::string& cmd) {
    const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  const std::string cli = LEVYPOT_CLI;
  EXPECT_EQ(status(cli + " validate " + cfg.string()), 0);
  EXPECT_EQ(status(cli + " run " + cfg.string() + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out.string() + ".json"));
  EXPECT_EQ(status(cli + " list-models"), 0);
  EXPECT_EQ(status(cli + " list-experiments"), 0);
  const fs::path bad = scratch("bad.ini");
  std::ofstream(bad) << kLevyIni << "colour = red\n";
  EXPECT_EQ(status(cli + " validate " + bad.string()), 2);
  const fs::path failing = scratch("failing.ini");
  std::ofstream(failing) << std::string(kLevyIni).replace(kLevyIni.find("diff(ball(0;3),ball(0;2))"), 25, "ball(0;2)");
  EXPECT_EQ(status(cli + " run " + failing.string() + " --out " + out.string()), 1);
}
