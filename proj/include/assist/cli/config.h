#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "assist/classifiers/training.h"
#include "assist/core/numeric.h"
#include "assist/eval/metrics.h"
#include "assist/renderer/scene.h"
#include "assist/signals2d/patch.h"
#include "assist/signals3d/texture_opt.h"

namespace assist::cli {

inline constexpr int kConfigSchemaVersion = 1;

enum class JobKind { train_ref, harden, attack_eval, patch2d, texture3d, patch3d, sweep, transfer, render };

const std::vector<std::string>& job_names();
std::string job_name(JobKind kind);
/// ConfigError for unknown names.
JobKind parse_job(const std::string& name);

/// Image set: a dataset directory, or the built-in synthetic desk world.
struct DataSource {
  std::optional<std::string> dir;
  int per_class = 50;
  std::uint64_t seed = 1;
};

/// One camera/light pair; the light is placed relative to the camera.
struct ViewParams {
  double azimuth = 0.0;
  double elevation = 0.0;
  double distance = 2.5;
  double fov_y = 40.0;
  double light_cone = 0.0;
  double light_roll = 0.0;
  double ambient = 0.4;
  double diffuse = 0.6;

  renderer::View view() const;
};

/// Explicit camera/light list, or `count` views sampled from the EoT ranges
/// with their own seed.
struct ViewSpec {
  std::vector<ViewParams> list;
  int count = 3;
  std::uint64_t seed = 4242;
};

struct SignalSpec {
  core::Direction direction = core::Direction::assistive;
  int true_label = 0;
  std::optional<int> target_label;
};

struct ExperimentConfig {
  JobKind job = JobKind::render;
  std::uint64_t seed = 0;
  std::string output_dir = "runs";

  std::optional<DataSource> train_data;
  std::optional<DataSource> test_data;
  std::optional<DataSource> data;
  std::optional<DataSource> hardened_data;

  /// Checkpoint paths or "builtin:<name>". Several entries form an ensemble,
  /// except for transfer jobs where each is its own row and column.
  std::vector<std::string> classifiers;

  std::string mesh = "builtin:car";
  /// "gray", "mesh" (texture shipped with the mesh file), "desk:<class>" or
  /// a PNG/PLY path.
  std::string texture = "gray";
  int texture_resolution = 64;
  core::Shape image_size{32, 32};
  renderer::Rgb background{0.45, 0.47, 0.5};

  classifiers::TrainConfig train;
  core::OptimConfig optim;
  signals3d::EotConfig eot;
  SignalSpec signal;
  signals2d::PatchTrainConfig patch2d;
  signals3d::PatchRegion patch_region{0, 0, 16, 16};
  std::vector<std::string> mask_groups;  // groups left free; empty = whole texture
  std::vector<std::string> frozen_groups;  // groups held fixed
  std::vector<eval::AttackSpec> attacks;
  ViewSpec views;
  eval::SweepRanges sweep;
};

/// Strict parse: unknown keys and wrong types raise ConfigError naming the
/// field path (for example "optim.step_size").
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json read_config_json(const std::string& path);

/// Top-level seed together with the copies held by the optimizer and trainer.
void set_seed(ExperimentConfig& cfg, std::uint64_t seed);

/// Full normalized form with every default filled in.
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

/// SHA-256 of the normalized JSON.
std::string config_hash(const ExperimentConfig& cfg);

/// Applies --deceptive: assistive signals become deceptive (targeted when a
/// distinct target label is set, untargeted otherwise).
void make_deceptive(ExperimentConfig& cfg);

signals3d::SignalMode signal_mode(const ExperimentConfig& cfg);

}  // namespace assist::cli
