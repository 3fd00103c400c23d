#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "assist/classifiers/classifier.h"
#include "assist/core/dataset.h"
#include "assist/core/numeric.h"
#include "assist/core/rng.h"

namespace assist::signals2d {

using classifiers::Classifier;
using core::Image;
using core::LabeledDataset;

enum class EraseFill { random, gray };

/// Random-erasing augmentation. With probability `probability` one rectangle
/// is filled. Its area is a uniform fraction of the image in
/// [area_min, area_max]; its short/long side ratio is uniform in
/// [aspect_min, aspect_max] and the rectangle is tall or wide with equal odds.
struct EraseParams {
  double probability = 0.5;
  double area_min = 0.02;
  double area_max = 0.4;
  double aspect_min = 0.3;
  double aspect_max = 1.0;
  EraseFill fill = EraseFill::random;
};

void validate(const EraseParams& params);

Image random_erase(const Image& image, core::Rng& rng, const EraseParams& params);

struct Location {
  int row = 0;
  int col = 0;
};

struct Patch {
  Image pixels;
  int target_label = 0;
};

/// Pastes the patch with its top-left corner at `at`. Pixels outside the
/// patch rectangle are untouched.
Image apply_patch(const Image& image, const Image& patch, Location at);

/// Uniform over all top-left corners that keep the patch inside the image.
Location random_location(core::Rng& rng, core::Shape image, core::Shape patch);

enum class PatchInit { random_uniform, gray };

struct PatchTrainConfig {
  int patch_height = 8;
  int patch_width = 8;
  bool random_location = true;
  Location fixed_location{};
  std::optional<EraseParams> random_erase;
  std::optional<core::Shape> resize_for_eval;
  int batch_size = 16;
  PatchInit init = PatchInit::random_uniform;
  core::Direction direction = core::Direction::assistive;
};

/// Patch trained only on images of `target_label` (a wrong label in
/// `positives` is a PreconditionError). Iterations, step size, sign mode and
/// seed come from `optim`. Each iteration averages the patch gradient over a
/// minibatch of composited positives.
Patch train_patch_2d(const Classifier& c, const LabeledDataset& positives, int target_label,
                     const PatchTrainConfig& cfg, const core::OptimConfig& optim);

/// The seeded starting raster train_patch_2d uses.
Image initial_patch(const PatchTrainConfig& cfg, std::uint64_t seed);

/// Mean target-class confidence with the patch pasted at seeded random
/// locations (or without a patch when `patch` is empty).
double mean_patched_confidence(const Classifier& c, const LabeledDataset& data, const Image* patch, int target_label,
                               std::uint64_t seed);

struct PatchMetadata {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Writes `<stem>.png` and `<stem>.json` (target label, size, config hash,
/// seed).
void save_patch(const Patch& patch, const std::filesystem::path& png_path, const PatchMetadata& meta);
Patch load_patch(const std::filesystem::path& png_path);

}  // namespace assist::signals2d
