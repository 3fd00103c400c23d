#pragma once

#include <memory>
#include <string>
#include <vector>

#include "assist/core/dataset.h"
#include "assist/core/rng.h"
#include "assist/renderer/scene.h"

namespace assist::eval {

/// A small procedural world of ten object classes rendered at low
/// resolution. Pairs of classes share a mesh (car/taxi, airliner/jet) and
/// differ only in texture, so both shape and appearance matter.
enum DeskClass : int { car, taxi, airliner, jet, stop_sign, round_sign, carrier, boat, ball, barrel };

inline constexpr int kDeskClasses = 10;

const std::vector<std::string>& desk_class_names();
/// Parses a class name; unknown names are a ConfigError.
int desk_class(const std::string& name);

/// Mesh names: "car", "airplane", "stop-sign", "round-sign", "carrier",
/// "boat", "ball", "barrel".
const std::vector<std::string>& desk_mesh_names();
std::shared_ptr<const renderer::Mesh> desk_mesh(const std::string& name);
std::shared_ptr<const renderer::Mesh> desk_mesh_for(int label);

struct DeskConfig {
  core::Shape image_size{32, 32};
  int texture_resolution = 64;
  renderer::SceneRanges ranges{{0.0, 360.0}, {5.0, 40.0}, {2.0, 2.8}, {40.0, 40.0},
                               {0.0, 45.0},  {0.0, 360.0}, {0.3, 0.6}, {0.4, 0.7}};
  double pixel_noise = 0.02;
};

/// Randomized class texture: palette colours with per-instance jitter and
/// per-texel noise.
renderer::Texture desk_texture(int label, core::Rng& rng, int resolution);

/// Scene holding the class mesh and `texture` on a neutral background; the
/// camera list is left empty.
renderer::Scene desk_scene(int label, renderer::Texture texture, const DeskConfig& cfg);

/// `per_class` renders of every class, interleaved by class, each with a
/// fresh texture, view, light, background and pixel noise.
core::LabeledDataset make_desk_dataset(int per_class, std::uint64_t seed, const DeskConfig& cfg);

/// Neutral background used for object scenes.
inline constexpr renderer::Rgb kDeskBackground{0.45, 0.47, 0.5};

}  // namespace assist::eval
