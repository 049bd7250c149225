#include "ucplab/errors.hpp"
#include "ucplab/scenario.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for spectral inequalities of Schroedinger operators"};
  app.set_version_flag("--version", ucplab::kVersion);

  std::string kind;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool force = false;
  app.add_option("kind", kind, "ucp | lifting | wegner | observability | control | estimate-N")
      ->required()
      ->check(CLI::IsMember({"ucp", "lifting", "wegner", "observability", "control", "estimate-N"}));
  app.add_option("--config", config_path, "JSON scenario file")->required();
  app.add_option("--seed", seed, "override the master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--force", force, "allow energy windows above the admissible maximum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    ucplab::CliOverrides overrides;
    overrides.seed = seed;
    if (out_dir) overrides.output_dir = *out_dir;
    overrides.force = force;
    const auto config = ucplab::load_config_file(config_path, ucplab::parse_kind(kind), overrides);
    const auto manifest = ucplab::run_scenario(config);
    for (const auto& f : manifest.findings) std::cerr << "finding: " << f << '\n';
    std::cout << "wrote";
    for (const auto& f : manifest.files) std::cout << ' ' << f;
    std::cout << " to " << config.output_dir.string() << " (config " << manifest.config_hash << ")\n";
    return 0;
  } catch (const ucplab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ucplab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
