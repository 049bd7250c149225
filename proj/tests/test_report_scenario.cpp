#include "ucplab/errors.hpp"
#include "ucplab/report.hpp"
#include "ucplab/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <sys/wait.h>

using namespace ucplab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ucplab_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ResultTable sample_table() {
  ResultTable t;
  t.kind = "wegner";
  t.columns = {"epsilon", "L", "mean", "stderr", "bound", "ratio"};
  t.units = {"energy", "length", "count", "count", "count", "1"};
  t.add_row({0.1, std::int64_t{10}, 1.0 / 3.0, 0.01, std::numeric_limits<double>::infinity(), 0.2});
  t.add_row({0.2, std::int64_t{20}, 2.5, 0.0, std::numeric_limits<double>::quiet_NaN(), -1e-300});
  t.summary = {{"note", "x"}};
  return t;
}

json minimal_ucp() { return {{"seed", 3}, {"L", 5}, {"E", 20}, {"delta", 0.2}}; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(UCPLAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

}  // namespace

TEST(Report, NumberFormat) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  for (double x : {1.0 / 3.0, 1e-300, 6.02214076e23, -0.0}) EXPECT_EQ(std::strtod(format_number(x).c_str(), nullptr), x);
}

TEST(Report, CsvSchema) {
  const std::string csv = to_csv(sample_table());
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "epsilon,L,mean,stderr,bound,ratio");
  std::getline(in, row);
  EXPECT_EQ(row, "0.10000000000000001,10,0.33333333333333331,0.01,inf,0.20000000000000001");
}

TEST(Report, JsonRoundTripIsExact) {
  const ResultTable t = sample_table();
  const ResultTable back = table_from_json(json::parse(to_json(t).dump()));
  EXPECT_TRUE(back == t);
  EXPECT_EQ(to_csv(back), to_csv(t));
  const json j = to_json(t);
  EXPECT_EQ(j.at("units").size(), t.columns.size());
}

TEST(Report, RejectsEmptyAndRaggedTables) {
  ResultTable t;
  t.kind = "ucp";
  t.columns = {"a"};
  t.units = {"1"};
  const auto dir = fresh_dir("empty");
  fs::create_directories(dir);
  EXPECT_THROW(emit_report(t, ReportFormat::Csv, dir), ConfigError);
  EXPECT_THROW(t.add_row({1.0, 2.0}), ConfigError);
  fs::remove_all(dir);
}

TEST(Report, EmitWritesAtomically) {
  const auto dir = fresh_dir("emit");
  fs::create_directories(dir);
  const auto path = emit_report(sample_table(), ReportFormat::Csv, dir);
  EXPECT_EQ(path.filename(), "results.csv");
  EXPECT_EQ(slurp(path), to_csv(sample_table()));
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
  EXPECT_EQ(names, std::set<std::string>{"results.csv"});
  fs::remove_all(dir);
}

TEST(Config, MissingDeltaNamesThePath) {
  json doc = minimal_ucp();
  doc.erase("delta");
  try {
    load_config(doc, ExperimentKind::Ucp);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/delta"), std::string::npos) << e.what();
  }
}

TEST(Config, SeedMandatoryAndKindChecked) {
  json doc = minimal_ucp();
  doc.erase("seed");
  EXPECT_THROW(load_config(doc, ExperimentKind::Ucp), ConfigError);
  CliOverrides o;
  o.seed = 9;
  EXPECT_EQ(load_config(doc, ExperimentKind::Ucp, o).seed, 9u);
  doc = minimal_ucp();
  doc["kind"] = "wegner";
  EXPECT_THROW(load_config(doc, ExperimentKind::Ucp), ConfigError);
  doc["seed"] = -1;
  doc.erase("kind");
  EXPECT_THROW(load_config(doc, ExperimentKind::Ucp), ConfigError);
}

TEST(Config, WrongFieldTypeNamesThePath) {
  json doc = minimal_ucp();
  doc["delta"] = "wide";
  auto cfg = load_config(doc, ExperimentKind::Ucp);
  try {
    execute_scenario(cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/delta"), std::string::npos) << e.what();
  }
}

TEST(Config, HashStableUnderFieldOrder) {
  const auto a = json::parse(R"({"seed": 1, "L": 5, "E": 20, "delta": 0.2, "potential": {"type": "constant", "value": 2}})");
  const auto b = json::parse(R"({"potential": {"value": 2, "type": "constant"}, "delta": 0.2, "E": 20, "L": 5, "seed": 1})");
  EXPECT_EQ(config_hash(load_config(a, ExperimentKind::Ucp)), config_hash(load_config(b, ExperimentKind::Ucp)));
  auto c = a;
  c["delta"] = 0.25;
  EXPECT_NE(config_hash(load_config(a, ExperimentKind::Ucp)), config_hash(load_config(c, ExperimentKind::Ucp)));
  CliOverrides o;
  o.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(load_config(a, ExperimentKind::Ucp)), config_hash(load_config(a, ExperimentKind::Ucp, o)));
}

TEST(Scenario, MinimalUcpRunListsThreeFiles) {
  const auto dir = fresh_dir("minimal");
  CliOverrides o;
  o.output_dir = dir;
  const auto manifest = run_scenario(load_config(minimal_ucp(), ExperimentKind::Ucp, o));
  EXPECT_EQ(manifest.files, (std::vector<std::string>{"results.csv", "results.json", "manifest.json"}));
  std::set<std::string> on_disk;
  for (const auto& e : fs::directory_iterator(dir)) on_disk.insert(e.path().filename().string());
  EXPECT_EQ(on_disk, std::set<std::string>(manifest.files.begin(), manifest.files.end()));
  const json m = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m.at("config_hash"), manifest.config_hash);
  EXPECT_EQ(m.at("seed"), 3);
  fs::remove_all(dir);
}

TEST(Scenario, ManifestListsEveryFile) {
  const auto dir = fresh_dir("control");
  CliOverrides o;
  o.output_dir = dir;
  const json doc = {{"seed", 1}, {"L", 1}, {"T", 0.5}, {"delta", 0.1}, {"points_per_unit", 16}, {"steps", 8}};
  const auto manifest = run_scenario(load_config(doc, ExperimentKind::Control, o));
  std::set<std::string> on_disk;
  for (const auto& e : fs::directory_iterator(dir)) on_disk.insert(e.path().filename().string());
  EXPECT_EQ(on_disk, std::set<std::string>(manifest.files.begin(), manifest.files.end()));
  EXPECT_TRUE(on_disk.count("trajectory.csv"));
  fs::remove_all(dir);
}

TEST(Scenario, RerunIsByteIdentical) {
  const auto d1 = fresh_dir("rerun1"), d2 = fresh_dir("rerun2");
  const json doc = {{"seed", 11}, {"L", {3, 4}}, {"E", 20}, {"delta", 0.15},
                    {"potential", {{"type", "random_uniform"}, {"min", -2}, {"max", 2}}}};
  CliOverrides o1, o2;
  o1.output_dir = d1;
  o2.output_dir = d2;
  run_scenario(load_config(doc, ExperimentKind::Ucp, o1));
  run_scenario(load_config(doc, ExperimentKind::Ucp, o2));
  EXPECT_EQ(slurp(d1 / "results.csv"), slurp(d2 / "results.csv"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Scenario, ThreadCountDoesNotChangeOutput) {
  const json weg = {{"seed", 5}, {"L", {6, 8}}, {"E", 3}, {"epsilon", {0.1, 0.5}}, {"samples", 16},
                    {"points_per_unit", 20}, {"model", {{"kind", "breather"}, {"measure", {{"omega_minus", 0.05}, {"omega_plus", 0.2}}}}}};
  CliOverrides force;
  force.force = true;
  auto cfg = load_config(weg, ExperimentKind::Wegner, force);
  cfg.threads = 1;
  const std::string serial = to_csv(execute_scenario(cfg).table);
  cfg.threads = 8;
  EXPECT_EQ(to_csv(execute_scenario(cfg).table), serial);
}

TEST(Scenario, WegnerColumnsAndForce) {
  const json weg = {{"seed", 5}, {"L", 6}, {"E", 3}, {"epsilon", {0.1}}, {"samples", 4},
                    {"points_per_unit", 20}, {"model", {{"kind", "breather"}, {"measure", {{"omega_minus", 0.05}, {"omega_plus", 0.2}}}}}};
  EXPECT_THROW(execute_scenario(load_config(weg, ExperimentKind::Wegner)), ConfigError);
  CliOverrides force;
  force.force = true;
  const auto table = execute_scenario(load_config(weg, ExperimentKind::Wegner, force)).table;
  EXPECT_EQ(table.columns, (std::vector<std::string>{"epsilon", "L", "mean", "stderr", "bound", "ratio"}));
}

TEST(Cli, ExitCodes) {
  const auto dir = fresh_dir("cli");
  write_file(dir / "ok.json", minimal_ucp().dump());
  json bad = minimal_ucp();
  bad.erase("delta");
  write_file(dir / "bad.json", bad.dump());
  write_file(dir / "broken.json", "{ not json");
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("ucp --config " + (dir / "ok.json").string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  EXPECT_EQ(run_cli("ucp --config " + (dir / "bad.json").string() + out), 2);
  EXPECT_EQ(run_cli("ucp --config " + (dir / "broken.json").string() + out), 2);
  EXPECT_EQ(run_cli("ucp --config " + (dir / "missing.json").string() + out), 2);
  EXPECT_EQ(run_cli("nonsense --config " + (dir / "ok.json").string()), 2);
  EXPECT_EQ(run_cli("ucp"), 2);
  EXPECT_EQ(run_cli("ucp --config " + (dir / "ok.json").string() + " --seed 4" + out), 0);
  EXPECT_EQ(json::parse(slurp(dir / "out" / "manifest.json")).at("seed"), 4);
  fs::remove_all(dir);
}

TEST(Cli, ThreadEnvironmentDoesNotChangeCsv) {
  const auto dir = fresh_dir("cli_threads");
  const json doc = {{"seed", 2}, {"L", {3, 4, 5}}, {"E", 20}, {"delta", 0.15}};
  write_file(dir / "c.json", doc.dump());
  const std::string base = "ucp --config " + (dir / "c.json").string() + " --out ";
  ASSERT_EQ(std::system(("UCPLAB_THREADS=1 " + std::string(UCPLAB_CLI) + " " + base + (dir / "a").string() +
                         " >/dev/null").c_str()),
            0);
  ASSERT_EQ(std::system(("UCPLAB_THREADS=8 " + std::string(UCPLAB_CLI) + " " + base + (dir / "b").string() +
                         " >/dev/null").c_str()),
            0);
  EXPECT_EQ(slurp(dir / "a" / "results.csv"), slurp(dir / "b" / "results.csv"));
  fs::remove_all(dir);
}
