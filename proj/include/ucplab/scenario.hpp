#pragma once

#include "ucplab/report.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ucplab {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { Ucp, Lifting, Wegner, Observability, Control, EstimateN };

ExperimentKind parse_kind(const std::string& name);
std::string kind_name(ExperimentKind kind);

// One experiment. `params` holds the kind-specific fields exactly as read from
// the configuration file (after CLI overrides); they are validated when the
// scenario runs.
struct ScenarioConfig {
  ExperimentKind kind = ExperimentKind::Ucp;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  bool force = false;
  unsigned threads = 1;
};

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  bool force = false;
};

// Reads the JSON document, applies overrides and checks the fields every kind
// needs. Field problems are reported as ConfigError naming the JSON path.
ScenarioConfig load_config(const nlohmann::json& doc, std::optional<ExperimentKind> kind,
                           const CliOverrides& overrides = {});
ScenarioConfig load_config_file(const std::filesystem::path& path, std::optional<ExperimentKind> kind,
                                const CliOverrides& overrides = {});

// Canonical form of the effective configuration; keys sorted, so the hash is
// independent of field order in the source file.
nlohmann::json canonical_config(const ScenarioConfig& config);
std::string config_hash(const ScenarioConfig& config);

struct RunManifest {
  std::string config_hash;
  std::string version = kVersion;
  std::string started;
  std::string finished;
  std::uint64_t seed = 0;
  std::string seed_rule;
  std::vector<std::string> files;
  std::vector<std::string> findings;

  nlohmann::json to_json() const;
};

struct ScenarioOutput {
  ResultTable table;
  std::vector<std::pair<std::string, std::string>> extra_files;  // name, content
  std::vector<std::string> findings;
};

// Runs the experiment in memory.
ScenarioOutput execute_scenario(const ScenarioConfig& config);

// Runs the experiment and writes results.csv, results.json, any extra files
// and manifest.json into the output directory.
RunManifest run_scenario(const ScenarioConfig& config);

}  // namespace ucplab
