#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "assist/cli/config.h"
#include "assist/eval/report.h"

namespace assist::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct ArtifactEntry {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunRecord {
  nlohmann::ordered_json config;
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::filesystem::path run_dir;
  std::vector<ArtifactEntry> artifacts;
};

nlohmann::ordered_json to_json(const RunRecord& record);

/// Runs the job in a fresh directory `<output_dir>/<UTC timestamp>-<config
/// hash prefix>` and writes every artifact plus run_record.json there.
/// Errors carry the module that raised them as a message prefix.
RunRecord run_experiment(const ExperimentConfig& cfg);

/// summary.json (report without timestamps) plus one CSV per table. Returns
/// the files written.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& run_dir, const eval::EvalReport& report);

/// One PNG per view, named view_01.png, view_02.png, ...
std::vector<std::filesystem::path> render_preview(const std::string& mesh, const std::string& texture,
                                                  const std::vector<renderer::View>& views,
                                                  const std::filesystem::path& out_dir, const ExperimentConfig& cfg);

/// True when every manifest entry exists with the recorded hash.
bool verify_manifest(const RunRecord& record);

}  // namespace assist::cli
