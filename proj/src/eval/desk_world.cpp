#include "assist/eval/desk_world.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "assist/core/errors.h"
#include "assist/renderer/primitives.h"
#include "assist/renderer/render.h"

namespace assist::eval {

using renderer::MeshBuilder;
using renderer::Rgb;
using renderer::Texture;
using renderer::Vec3;

namespace {

struct MeshSpec {
  std::shared_ptr<const renderer::Mesh> mesh;
  int atlas = 4;
  std::vector<std::string> roles;  // per atlas tile
};

const Vec3 kX(1, 0, 0), kY(0, 1, 0), kZ(0, 0, 1);

MeshSpec build_car() {
  MeshBuilder b(4, 1.0 / 64.0);
  b.add_box({0.0, -0.08, 0.0}, {0.62, 0.14, 0.28}, 2, "body", {1, 1, 1, 1, 0, 0});
  b.add_box({-0.08, 0.16, 0.0}, {0.32, 0.11, 0.25}, 2, {"windows", "windows", "body", "body", "windows", "windows"},
            {3, 3, 2, 2, 3, 3});
  for (double x : {-0.38, 0.38}) {
    for (double z : {-0.27, 0.27}) b.add_cylinder({x, -0.22, z}, kZ, 0.13, 0.05, 14, "tyres", 4, "tyres", 4);
  }
  for (double z : {-0.18, 0.18}) b.add_box({0.625, -0.02, z}, {0.02, 0.035, 0.06}, 1, "lights", {5, 5, 5, 5, 5, 5});
  return {std::make_shared<const renderer::Mesh>(b.build()), 4,
          {"body_side", "body", "roof", "windows", "tyres", "lights"}};
}

MeshSpec build_airplane() {
  MeshBuilder b(4, 1.0 / 64.0);
  b.add_cylinder({0.0, 0.0, 0.0}, kX, 0.1, 0.62, 16, "fuselage", 0, "nose", 1);
  b.add_box({0.02, -0.02, 0.0}, {0.16, 0.02, 0.62}, 1, "wings", {2, 2, 2, 2, 2, 2});
  b.add_box({-0.54, 0.17, 0.0}, {0.08, 0.15, 0.02}, 1, "tail", {3, 3, 3, 3, 3, 3});
  b.add_box({-0.55, 0.03, 0.0}, {0.06, 0.015, 0.22}, 1, "tail", {3, 3, 3, 3, 3, 3});
  return {std::make_shared<const renderer::Mesh>(b.build()), 4, {"fuselage", "nose", "wings", "tail"}};
}

MeshSpec build_sign(int segments) {
  MeshBuilder b(4, 1.0 / 64.0);
  b.add_cylinder({0.0, 0.22, 0.0}, kZ, 0.42, 0.03, segments, "rim", 1, "face", 0);
  b.add_cylinder({0.0, -0.36, 0.0}, kY, 0.035, 0.37, 8, "pole", 2, "pole", 2);
  return {std::make_shared<const renderer::Mesh>(b.build()), 4, {"face", "rim", "pole"}};
}

MeshSpec build_carrier() {
  MeshBuilder b(4, 1.0 / 64.0);
  b.add_box({0.0, -0.07, 0.0}, {0.7, 0.08, 0.17}, 2, "hull", {1, 1, 1, 1, 0, 0});
  b.add_box({0.02, 0.03, 0.0}, {0.72, 0.02, 0.24}, 2, {"hull", "hull", "hull", "deck", "hull", "hull"},
            {1, 1, 1, 2, 1, 1});
  b.add_box({0.18, 0.15, -0.19}, {0.1, 0.1, 0.04}, 1, "island", {3, 3, 3, 3, 3, 3});
  return {std::make_shared<const renderer::Mesh>(b.build()), 4, {"hull_side", "hull", "deck", "island"}};
}

MeshSpec build_boat() {
  MeshBuilder b(4, 1.0 / 64.0);
  b.add_box({0.0, -0.12, 0.0}, {0.45, 0.1, 0.17}, 2, "hull", {1, 1, 1, 1, 0, 0});
  b.add_box({-0.06, 0.06, 0.0}, {0.2, 0.08, 0.12}, 1, "cabin", {3, 3, 3, 3, 3, 3});
  b.add_cylinder({0.05, 0.32, 0.0}, kY, 0.02, 0.2, 6, "mast", 4, "mast", 4);
  return {std::make_shared<const renderer::Mesh>(b.build()), 4, {"hull_side", "hull", "unused", "cabin", "mast"}};
}

MeshSpec build_ball() {
  MeshBuilder b(1, 1.0 / 64.0);
  b.add_sphere({0.0, 0.0, 0.0}, 0.5, 20, 10, "surface", 0);
  return {std::make_shared<const renderer::Mesh>(b.build()), 1, {"surface"}};
}

MeshSpec build_barrel() {
  MeshBuilder b(2, 1.0 / 64.0);
  b.add_cylinder({0.0, 0.0, 0.0}, kY, 0.33, 0.45, 18, "staves", 0, "lid", 1);
  return {std::make_shared<const renderer::Mesh>(b.build()), 2, {"staves", "lid"}};
}

const std::map<std::string, MeshSpec>& mesh_specs() {
  static const std::map<std::string, MeshSpec> specs = {
      {"car", build_car()},         {"airplane", build_airplane()}, {"stop-sign", build_sign(8)},
      {"round-sign", build_sign(24)}, {"carrier", build_carrier()},   {"boat", build_boat()},
      {"ball", build_ball()},       {"barrel", build_barrel()}};
  return specs;
}

const std::string& mesh_name_for(int label) {
  static const std::vector<std::string> names = {"car",        "car",     "airplane", "airplane", "stop-sign",
                                                 "round-sign", "carrier", "boat",     "ball",     "barrel"};
  if (label < 0 || label >= kDeskClasses) throw IndexError(fmt::format("desk class {} outside [0, 10)", label));
  return names[static_cast<std::size_t>(label)];
}

Rgb jitter(const Rgb& c, core::Rng& rng, double amount) {
  Rgb out;
  for (std::size_t ch = 0; ch < 3; ++ch) out[ch] = std::clamp(c[ch] + rng.uniform(-amount, amount), 0.0, 1.0);
  return out;
}

Rgb pick(core::Rng& rng, const std::vector<Rgb>& options) {
  return options[static_cast<std::size_t>(rng.below(options.size()))];
}

bool in(double x, double lo, double hi) { return x >= lo && x < hi; }

// Per-instance colour choices; role -> (s, t) -> colour.
class Painter {
 public:
  Painter(int label, core::Rng& rng) : label_(label) {
    const Rgb tyre{0.07, 0.07, 0.08}, window{0.12, 0.17, 0.27}, lamp{0.95, 0.93, 0.75};
    switch (label) {
      case car:
        colors_["body"] = jitter(pick(rng, {{0.75, 0.1, 0.1}, {0.1, 0.22, 0.7}, {0.1, 0.5, 0.2}, {0.45, 0.1, 0.5}}), rng, 0.08);
        colors_["windows"] = jitter(window, rng, 0.04);
        colors_["tyres"] = tyre;
        colors_["lights"] = lamp;
        break;
      case taxi:
        colors_["body"] = jitter({0.95, 0.78, 0.1}, rng, 0.05);
        colors_["windows"] = jitter(window, rng, 0.04);
        colors_["tyres"] = tyre;
        colors_["lights"] = lamp;
        break;
      case airliner:
        colors_["fuselage"] = jitter({0.92, 0.92, 0.94}, rng, 0.05);
        colors_["stripe"] = jitter(pick(rng, {{0.1, 0.2, 0.6}, {0.7, 0.1, 0.1}}), rng, 0.05);
        colors_["wings"] = jitter({0.72, 0.74, 0.78}, rng, 0.05);
        colors_["tail"] = jitter(pick(rng, {{0.8, 0.1, 0.1}, {0.1, 0.2, 0.7}, {0.95, 0.55, 0.1}}), rng, 0.06);
        break;
      case jet:
        colors_["fuselage"] = jitter(pick(rng, {{0.32, 0.34, 0.37}, {0.3, 0.36, 0.24}}), rng, 0.05);
        colors_["camo"] = jitter({0.2, 0.22, 0.2}, rng, 0.04);
        phase_ = rng.uniform(0.0, 2.0 * std::numbers::pi);
        break;
      case stop_sign:
        colors_["face"] = jitter({0.82, 0.08, 0.08}, rng, 0.06);
        colors_["ring"] = jitter({0.95, 0.95, 0.95}, rng, 0.03);
        colors_["pole"] = jitter({0.6, 0.6, 0.62}, rng, 0.05);
        break;
      case round_sign:
        colors_["face"] = jitter({0.1, 0.3, 0.8}, rng, 0.06);
        colors_["ring"] = jitter({0.95, 0.95, 0.95}, rng, 0.03);
        colors_["pole"] = jitter({0.6, 0.6, 0.62}, rng, 0.05);
        break;
      case carrier:
        colors_["hull"] = jitter({0.5, 0.53, 0.56}, rng, 0.05);
        colors_["deck"] = jitter({0.22, 0.23, 0.25}, rng, 0.04);
        colors_["line"] = jitter({0.92, 0.92, 0.85}, rng, 0.04);
        break;
      case boat:
        colors_["hull"] = jitter(pick(rng, {{0.92, 0.92, 0.9}, {0.55, 0.32, 0.15}}), rng, 0.05);
        colors_["stripe"] = jitter({0.1, 0.25, 0.65}, rng, 0.05);
        colors_["cabin"] = jitter({0.9, 0.88, 0.82}, rng, 0.05);
        colors_["mast"] = jitter({0.45, 0.3, 0.15}, rng, 0.05);
        break;
      case ball: {
        const std::vector<Rgb> sectors = {{0.9, 0.1, 0.1}, {0.95, 0.85, 0.1}, {0.1, 0.3, 0.85},
                                          {0.1, 0.7, 0.2}, {0.95, 0.95, 0.95}, {0.95, 0.5, 0.1}};
        for (const auto& c : sectors) sector_colors_.push_back(jitter(c, rng, 0.05));
        phase_ = rng.uniform();
        break;
      }
      case barrel:
        colors_["staves"] = jitter(pick(rng, {{0.55, 0.3, 0.12}, {0.8, 0.4, 0.1}}), rng, 0.05);
        colors_["band"] = jitter({0.2, 0.2, 0.22}, rng, 0.04);
        break;
      default:
        break;
    }
  }

  Rgb operator()(const std::string& role, double s, double t) const {
    switch (label_) {
      case car:
      case taxi:
        if (role == "body_side" && label_ == taxi && in(t, 0.45, 0.65)) {
          return (static_cast<int>(s * 12) + static_cast<int>((t - 0.45) * 10)) % 2 ? Rgb{0.05, 0.05, 0.05}
                                                                                    : Rgb{0.95, 0.95, 0.95};
        }
        if (role == "body_side" || role == "body" || role == "roof") return colors_.at("body");
        return colors_.at(role);
      case airliner:
        if (role == "fuselage" && (in(s, 0.92, 0.97) || in(s, 0.53, 0.58))) return colors_.at("stripe");
        if (role == "nose") return colors_.at("fuselage");
        return colors_.at(role);
      case jet: {
        const double blob = std::sin(9.0 * s + phase_) * std::sin(7.0 * t + 2.0 * phase_);
        return blob > 0.3 ? colors_.at("camo") : colors_.at("fuselage");
      }
      case stop_sign:
      case round_sign:
        if (role == "face") return in(s, 0.72, 0.86) ? colors_.at("ring") : colors_.at("face");
        if (role == "rim") return colors_.at("ring");
        return colors_.at("pole");
      case carrier:
        if (role == "deck") return in(t, 0.46, 0.54) || in(s, 0.1, 0.13) ? colors_.at("line") : colors_.at("deck");
        if (role == "island") return colors_.at("hull");
        return colors_.at("hull");
      case boat:
        if (role == "hull_side" && in(t, 0.55, 0.7)) return colors_.at("stripe");
        if (role == "hull_side" || role == "hull") return colors_.at("hull");
        if (role == "cabin") return in(t, 0.5, 0.75) && static_cast<int>(s * 6) % 2 ? Rgb{0.15, 0.2, 0.3} : colors_.at("cabin");
        if (role == "mast") return colors_.at("mast");
        return {0.5, 0.5, 0.5};
      case ball: {
        const double u = std::fmod(s + phase_, 1.0);
        return sector_colors_[static_cast<std::size_t>(u * 6.0) % sector_colors_.size()];
      }
      case barrel:
        if (role == "staves" && (in(t, 0.15, 0.23) || in(t, 0.77, 0.85))) return colors_.at("band");
        if (role == "lid") return colors_.at("band");
        return colors_.at("staves");
      default:
        return {0.5, 0.5, 0.5};
    }
  }

 private:
  int label_;
  std::map<std::string, Rgb> colors_;
  std::vector<Rgb> sector_colors_;
  double phase_ = 0.0;
};

}  // namespace

const std::vector<std::string>& desk_class_names() {
  static const std::vector<std::string> names = {"car",        "taxi",    "airliner", "jet",  "stop-sign",
                                                 "round-sign", "carrier", "boat",     "ball", "barrel"};
  return names;
}

int desk_class(const std::string& name) {
  const auto& names = desk_class_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError(fmt::format("unknown desk class '{}'", name));
  return static_cast<int>(it - names.begin());
}

const std::vector<std::string>& desk_mesh_names() {
  static const std::vector<std::string> names = {"car",     "airplane", "stop-sign", "round-sign",
                                                 "carrier", "boat",     "ball",      "barrel"};
  return names;
}

std::shared_ptr<const renderer::Mesh> desk_mesh(const std::string& name) {
  const auto& specs = mesh_specs();
  const auto it = specs.find(name);
  if (it == specs.end()) throw ConfigError(fmt::format("unknown desk mesh '{}'", name));
  return it->second.mesh;
}

std::shared_ptr<const renderer::Mesh> desk_mesh_for(int label) { return desk_mesh(mesh_name_for(label)); }

Texture desk_texture(int label, core::Rng& rng, int resolution) {
  const MeshSpec& spec = mesh_specs().at(mesh_name_for(label));
  Texture tex = Texture::uv(resolution, {0.5, 0.5, 0.5});
  const int tile = resolution / spec.atlas;
  if (tile < 2) throw ConfigError(fmt::format("texture resolution {} too small for the atlas", resolution));
  Painter paint(label, rng);
  for (int row = 0; row < resolution; ++row) {
    for (int col = 0; col < resolution; ++col) {
      const std::size_t idx = static_cast<std::size_t>(row / tile * spec.atlas + col / tile);
      if (idx >= spec.roles.size()) continue;
      const double s = (col % tile + 0.5) / tile;
      const double t = 1.0 - (row % tile + 0.5) / tile;
      const Rgb c = paint(spec.roles[idx], s, t);
      for (int ch = 0; ch < 3; ++ch) {
        tex.at(tex.texel_slot(row, col), ch) = std::clamp(c[static_cast<std::size_t>(ch)] + 0.03 * rng.normal(), 0.0, 1.0);
      }
    }
  }
  return tex;
}

renderer::Scene desk_scene(int label, Texture texture, const DeskConfig& cfg) {
  renderer::Scene scene;
  scene.mesh = desk_mesh_for(label);
  scene.texture = std::move(texture);
  scene.image_size = cfg.image_size;
  scene.background = kDeskBackground;
  return scene;
}

core::LabeledDataset make_desk_dataset(int per_class, std::uint64_t seed, const DeskConfig& cfg) {
  if (per_class < 1) throw DomainError("make_desk_dataset: per_class must be >= 1");
  core::LabeledDataset data(kDeskClasses);
  const core::Rng root = core::Rng(seed).split("desk-dataset");
  for (int i = 0; i < per_class * kDeskClasses; ++i) {
    const int label = i % kDeskClasses;
    core::Rng rng = root.split(static_cast<std::uint64_t>(i));
    core::Rng tex_rng = rng.split("texture");
    core::Rng view_rng = rng.split("view");
    renderer::Scene scene = desk_scene(label, desk_texture(label, tex_rng, cfg.texture_resolution), cfg);
    const double gray = rng.uniform(0.2, 0.75);
    for (double& b : scene.background) b = std::clamp(gray + rng.uniform(-0.06, 0.06), 0.0, 1.0);
    scene = renderer::with_views(scene, renderer::sample_scene_params(view_rng, cfg.ranges, 1));
    core::Image image = renderer::render_batch(scene).images.front();
    for (double& v : image.values()) v = std::clamp(v + cfg.pixel_noise * rng.normal(), 0.0, 1.0);
    data.add(std::move(image), label);
  }
  return data;
}

}  // namespace assist::eval
