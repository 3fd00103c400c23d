#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "assist/cli/config.h"
#include "assist/cli/runner.h"
#include "assist/core/errors.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitRuntime = 4;

const char* describe(const std::string& job) {
  if (job == "train-ref") return "train the reference CNN";
  if (job == "harden") return "replace every image with its assistive version";
  if (job == "attack-eval") return "accuracy under FGSM/PGD";
  if (job == "patch2d") return "train a 2D patch under location and erase EoT";
  if (job == "texture3d") return "optimize a full or masked texture through the renderer";
  if (job == "patch3d") return "optimize a UV patch region through the renderer";
  if (job == "sweep") return "grid over camera pose and lighting";
  if (job == "transfer") return "optimize per model, cross-evaluate every pair";
  return "render a mesh from the configured views";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assistive and deceptive signal toolkit"};
  app.set_version_flag("--version", assist::cli::kToolVersion);
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool deceptive = false;
  app.add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out, "override the output directory");
  app.add_flag("--deceptive", deceptive, "flip assistive signals to deceptive ones");
  for (const auto& name : assist::cli::job_names()) app.add_subcommand(name, describe(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  const std::string job = app.get_subcommands().front()->get_name();

  assist::cli::ExperimentConfig cfg;
  try {
    nlohmann::json j = config_path.empty() ? nlohmann::json::object() : assist::cli::read_config_json(config_path);
    if (!j.is_object()) throw assist::ConfigError("config: top level must be an object");
    if (!j.contains("job")) {
      j["job"] = job;
    } else if (j["job"] != job) {
      throw assist::ConfigError(fmt::format("job: config says {} but subcommand is '{}'", j["job"].dump(), job));
    }
    cfg = assist::cli::parse_config(j);
    if (seed) assist::cli::set_seed(cfg, *seed);
    if (out) cfg.output_dir = *out;
    if (deceptive) assist::cli::make_deceptive(cfg);
    assist::cli::signal_mode(cfg);
  } catch (const assist::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const auto record = assist::cli::run_experiment(cfg);
    std::cout << record.run_dir.string() << "\n";
    return 0;
  } catch (const assist::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const assist::FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const assist::IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
