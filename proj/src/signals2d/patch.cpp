#include "assist/signals2d/patch.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "assist/core/errors.h"
#include "assist/core/io.h"

namespace assist::signals2d {

void validate(const EraseParams& p) {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!(p.probability >= 0.0 && p.probability <= 1.0)) throw ConfigError("erase probability must lie in [0, 1]");
  if (!in_unit(p.area_min) || !in_unit(p.area_max) || p.area_min > p.area_max) {
    throw ConfigError("erase area range must be non-empty and inside (0, 1]");
  }
  if (!in_unit(p.aspect_min) || !in_unit(p.aspect_max) || p.aspect_min > p.aspect_max) {
    throw ConfigError("erase aspect range must be non-empty and inside (0, 1]");
  }
}

Image random_erase(const Image& image, core::Rng& rng, const EraseParams& params) {
  validate(params);
  if (image.empty() || !rng.bernoulli(params.probability)) return image;
  const int h_img = image.height(), w_img = image.width();
  const double area = rng.uniform(params.area_min, params.area_max) * h_img * w_img;
  const double ratio = rng.uniform(params.aspect_min, params.aspect_max);
  const double tall = rng.bernoulli(0.5) ? 1.0 / ratio : ratio;  // height / width
  const int h = std::clamp(static_cast<int>(std::lround(std::sqrt(area * tall))), 1, h_img);
  const int w = std::clamp(static_cast<int>(std::lround(std::sqrt(area / tall))), 1, w_img);
  const int top = rng.uniform_int(0, h_img - h);
  const int left = rng.uniform_int(0, w_img - w);
  Image out = image;
  for (int r = top; r < top + h; ++r) {
    for (int c = left; c < left + w; ++c) {
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = params.fill == EraseFill::gray ? 0.5 : rng.uniform();
    }
  }
  return out;
}

Image apply_patch(const Image& image, const Image& patch, Location at) {
  if (patch.empty()) return image;
  if (at.row < 0 || at.col < 0 || at.row + patch.height() > image.height() ||
      at.col + patch.width() > image.width()) {
    throw BoundsError(fmt::format("patch {}x{} at ({}, {}) does not fit in {}x{} image", patch.height(), patch.width(),
                                  at.row, at.col, image.height(), image.width()));
  }
  Image out = image;
  for (int r = 0; r < patch.height(); ++r) {
    for (int c = 0; c < patch.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) out.at(at.row + r, at.col + c, ch) = patch.at(r, c, ch);
    }
  }
  return out;
}

Location random_location(core::Rng& rng, core::Shape image, core::Shape patch) {
  if (patch.height > image.height || patch.width > image.width) {
    throw BoundsError(fmt::format("patch {}x{} larger than image {}x{}", patch.height, patch.width, image.height,
                                  image.width));
  }
  const int row = rng.uniform_int(0, image.height - patch.height);
  const int col = rng.uniform_int(0, image.width - patch.width);
  return {row, col};
}

Image initial_patch(const PatchTrainConfig& cfg, std::uint64_t seed) {
  if (cfg.patch_height <= 0 || cfg.patch_width <= 0) throw ConfigError("patch size must be positive");
  Image patch(core::Shape{cfg.patch_height, cfg.patch_width}, 0.5);
  if (cfg.init == PatchInit::random_uniform) {
    core::Rng rng = core::Rng(seed).split("patch-init");
    for (double& v : patch.values()) v = rng.uniform();
  }
  return patch;
}

Patch train_patch_2d(const Classifier& c, const LabeledDataset& positives, int target_label,
                     const PatchTrainConfig& cfg, const core::OptimConfig& optim) {
  core::validate(optim);
  if (cfg.batch_size <= 0) throw ConfigError("patch batch_size must be positive");
  if (cfg.random_erase) validate(*cfg.random_erase);
  if (target_label < 0 || target_label >= c.num_classes()) {
    throw IndexError(fmt::format("target label {} outside [0, {})", target_label, c.num_classes()));
  }
  for (std::size_t i = 0; i < positives.size(); ++i) {
    if (positives[i].label != target_label) {
      throw PreconditionError(fmt::format(
          "patch training item {} has label {}; assistive patches train only on target class {}", i,
          positives[i].label, target_label));
    }
  }
  Patch patch{initial_patch(cfg, optim.seed), target_label};
  if (optim.iterations == 0) return patch;
  if (positives.empty()) throw DomainError("patch training needs at least one positive image");

  const core::Shape image_shape = c.input_shape();
  const core::Shape patch_shape = patch.pixels.shape();
  if (patch_shape.height > image_shape.height || patch_shape.width > image_shape.width) {
    throw BoundsError("patch larger than the classifier input");
  }
  if (!cfg.random_location) {
    apply_patch(Image(image_shape), patch.pixels, cfg.fixed_location);  // bounds check only
  }

  core::Rng root(optim.seed);
  core::Rng order_rng = root.split("order");
  core::Rng place_rng = root.split("location");
  core::Rng erase_rng = root.split("erase");
  const double direction = cfg.direction == core::Direction::assistive ? -1.0 : 1.0;

  std::vector<std::size_t> order(positives.size());
  std::size_t cursor = order.size();
  core::PixelGrad image_grad;
  std::vector<double> grad(patch.pixels.size());

  for (int it = 0; it < optim.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (int b = 0; b < cfg.batch_size; ++b) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
        cursor = 0;
      }
      const Image& base = positives[order[cursor++]].image;
      classifiers::check_input(c, base);
      const Location at = cfg.random_location ? random_location(place_rng, image_shape, patch_shape)
                                              : cfg.fixed_location;
      const Image background = cfg.random_erase ? random_erase(base, erase_rng, *cfg.random_erase) : base;
      const Image composite = apply_patch(background, patch.pixels, at);
      c.loss_gradient(composite, target_label, image_grad);
      // Only pixels under the mask depend on the patch.
      for (int r = 0; r < patch_shape.height; ++r) {
        for (int col = 0; col < patch_shape.width; ++col) {
          for (int ch = 0; ch < 3; ++ch) {
            grad[patch.pixels.index(r, col, ch)] += image_grad.at(at.row + r, at.col + col, ch);
          }
        }
      }
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double g = grad[i] / cfg.batch_size;
      patch.pixels[i] += direction * optim.step_size * (optim.use_sign_gradient ? core::sign(g) : g);
    }
    core::clip_unit_inplace(patch.pixels.values());
  }
  return patch;
}

double mean_patched_confidence(const Classifier& c, const LabeledDataset& data, const Image* patch, int target_label,
                               std::uint64_t seed) {
  if (data.empty()) throw DomainError("mean_patched_confidence: empty dataset");
  core::Rng rng = core::Rng(seed).split("eval-location");
  double total = 0.0;
  for (const auto& item : data) {
    Image x = item.image;
    if (patch && !patch->empty()) x = apply_patch(x, *patch, random_location(rng, x.shape(), patch->shape()));
    total += c.predict(x)[static_cast<std::size_t>(target_label)];
  }
  return total / static_cast<double>(data.size());
}

void save_patch(const Patch& patch, const std::filesystem::path& png_path, const PatchMetadata& meta) {
  core::save_png(patch.pixels, png_path);
  nlohmann::ordered_json j;
  j["target_label"] = patch.target_label;
  j["height"] = patch.pixels.height();
  j["width"] = patch.pixels.width();
  j["config_hash"] = meta.config_hash;
  j["seed"] = meta.seed;
  auto sidecar = png_path;
  sidecar.replace_extension(".json");
  core::write_text_file(sidecar, j.dump(2) + "\n");
}

Patch load_patch(const std::filesystem::path& png_path) {
  auto sidecar = png_path;
  sidecar.replace_extension(".json");
  std::ifstream in(sidecar);
  if (!in) throw IoError(fmt::format("missing patch sidecar '{}'", sidecar.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("{}: {}", sidecar.string(), e.what()));
  }
  if (!j.contains("target_label") || !j["target_label"].is_number_integer()) {
    throw FormatError(fmt::format("{}: field 'target_label' missing or not an integer", sidecar.string()));
  }
  Patch patch{core::load_png(png_path), j["target_label"].get<int>()};
  if (j.value("height", -1) != patch.pixels.height() || j.value("width", -1) != patch.pixels.width()) {
    throw FormatError(fmt::format("{}: 'height'/'width' disagree with the PNG", sidecar.string()));
  }
  return patch;
}

}  // namespace assist::signals2d
