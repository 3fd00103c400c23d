#include "checks.h"

#include <algorithm>
#include <cmath>

#include "assist/classifiers/training.h"
#include "assist/eval/desk_world.h"
#include "assist/renderer/primitives.h"

namespace assist::testing {

using core::Image;
using core::PixelGrad;

double rel_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

FdStats classifier_fd_check(const classifiers::Classifier& c, const Image& image, int target, int coords,
                            core::Rng& rng, double h) {
  const auto* cnn = dynamic_cast<const classifiers::ReferenceCNN*>(&c);
  PixelGrad grad;
  c.loss_gradient(image, target, grad);
  PixelGrad scratch;
  FdStats stats;
  const int max_draws = coords * 50;
  for (int draw = 0; draw < max_draws && stats.checked < coords; ++draw) {
    const std::size_t i = rng.below(image.size());
    Image plus = image, minus = image;
    plus[i] += h;
    minus[i] -= h;
    if (cnn && (cnn->activation_pattern(plus) != cnn->activation_pattern(minus) ||
                cnn->activation_pattern(plus) != cnn->activation_pattern(image))) {
      ++stats.skipped;
      continue;
    }
    const double lp = c.loss_gradient(plus, target, scratch);
    const double lm = c.loss_gradient(minus, target, scratch);
    const double numeric = (lp - lm) / (2.0 * h);
    stats.max_rel = std::max(stats.max_rel, rel_error(grad[i], numeric));
    ++stats.checked;
  }
  return stats;
}

namespace {

double mean_loss(const classifiers::Classifier& c, const renderer::Scene& scene, int target,
                 std::vector<PixelGrad>* grads) {
  const auto batch = renderer::render_batch(scene);
  const double inv = 1.0 / static_cast<double>(batch.images.size());
  double loss = 0.0;
  PixelGrad g;
  for (const auto& img : batch.images) {
    loss += inv * c.loss_gradient(img, target, g);
    if (grads) {
      for (double& v : g.values()) v *= inv;
      grads->push_back(g);
    }
  }
  return loss;
}

}  // namespace

FdStats texture_fd_check(const classifiers::Classifier& c, const renderer::Scene& scene, int target, int coords,
                         core::Rng& rng, double h) {
  const auto batch = renderer::render_batch(scene);
  std::vector<std::uint32_t> read;
  for (const auto& jac : batch.jacobians) {
    for (const auto& tap : jac.taps) read.push_back(tap.slot);
  }
  std::sort(read.begin(), read.end());
  read.erase(std::unique(read.begin(), read.end()), read.end());

  std::vector<PixelGrad> pixel_grads;
  mean_loss(c, scene, target, &pixel_grads);
  const auto grad = renderer::texture_gradient(batch, pixel_grads);

  FdStats stats;
  if (read.empty()) return stats;
  renderer::Scene probe = scene;
  for (int k = 0; k < coords; ++k) {
    const std::size_t slot = read[rng.below(read.size())];
    const std::size_t i = slot * 3 + rng.below(3);
    probe.texture = scene.texture;
    probe.texture.values()[i] += h;
    const double lp = mean_loss(c, probe, target, nullptr);
    probe.texture.values()[i] -= 2.0 * h;
    const double lm = mean_loss(c, probe, target, nullptr);
    stats.max_rel = std::max(stats.max_rel, rel_error(grad[i], (lp - lm) / (2.0 * h)));
    ++stats.checked;
  }
  return stats;
}

renderer::Scene random_scene(core::Rng& rng, int views, core::Shape image_size) {
  static const std::vector<std::shared_ptr<const renderer::Mesh>> pool = [] {
    std::vector<std::shared_ptr<const renderer::Mesh>> p;
    for (const auto& name : eval::desk_mesh_names()) p.push_back(eval::desk_mesh(name));
    p.push_back(std::make_shared<const renderer::Mesh>(renderer::uv_sphere(16, 8)));
    return p;
  }();
  renderer::Scene scene;
  scene.mesh = pool[rng.below(pool.size())];
  scene.image_size = image_size;
  scene.background = {0.0, 0.0, 0.0};
  scene.texture = rng.bernoulli(0.5) ? renderer::Texture::uv(16) : renderer::Texture::vertex(scene.mesh->vertex_count());
  for (double& v : scene.texture.values()) v = rng.uniform(0.05, 0.95);

  renderer::SceneRanges ranges;
  ranges.distance = {2.0, 3.0};
  ranges.light_cone_deg = {0.0, 80.0};
  std::vector<renderer::View> sampled = renderer::sample_scene_params(rng, ranges, views);
  return renderer::with_views(scene, sampled);
}

std::vector<Image> render_images(const renderer::Scene& scene) { return renderer::render_batch(scene).images; }

namespace {

renderer::Texture random_like(const renderer::Texture& t, core::Rng& rng, double lo, double hi) {
  renderer::Texture out = t;
  for (double& v : out.values()) v = rng.uniform(lo, hi);
  return out;
}

}  // namespace

double linearity_error(const renderer::Scene& scene, core::Rng& rng) {
  renderer::Scene s = scene;
  s.background = {0.0, 0.0, 0.0};
  const auto t1 = random_like(scene.texture, rng, 0.0, 1.0);
  const auto t2 = random_like(scene.texture, rng, 0.0, 1.0);
  const double a = rng.uniform(0.0, 1.0);
  const double b = rng.uniform(0.0, 1.0 - a);
  renderer::Texture mix = t1;
  for (std::size_t i = 0; i < mix.values().size(); ++i) mix.values()[i] = a * t1.values()[i] + b * t2.values()[i];

  s.texture = t1;
  const auto r1 = render_images(s);
  s.texture = t2;
  const auto r2 = render_images(s);
  s.texture = mix;
  const auto rm = render_images(s);
  double worst = 0.0;
  for (std::size_t v = 0; v < rm.size(); ++v) {
    for (std::size_t i = 0; i < rm[v].size(); ++i) {
      worst = std::max(worst, std::abs(rm[v][i] - (a * r1[v][i] + b * r2[v][i])));
    }
  }
  return worst;
}

double adjoint_rel_error(const renderer::Scene& scene, core::Rng& rng) {
  renderer::Scene s = scene;
  s.texture = random_like(scene.texture, rng, 0.3, 0.7);
  const auto base = renderer::render_batch(s);
  renderer::Texture direction = random_like(scene.texture, rng, -0.25, 0.25);
  renderer::Texture shifted = s.texture;
  for (std::size_t i = 0; i < shifted.values().size(); ++i) shifted.values()[i] += direction.values()[i];
  s.texture = shifted;
  const auto moved = render_images(s);

  std::vector<PixelGrad> g;
  double lhs = 0.0;
  for (std::size_t v = 0; v < moved.size(); ++v) {
    PixelGrad pg(moved[v].shape());
    for (std::size_t i = 0; i < pg.size(); ++i) {
      pg[i] = rng.uniform(-1.0, 1.0);
      lhs += pg[i] * (moved[v][i] - base.images[v][i]);
    }
    g.push_back(std::move(pg));
  }
  const auto jt = renderer::texture_gradient(base, g);
  double rhs = 0.0;
  for (std::size_t i = 0; i < jt.size(); ++i) rhs += jt[i] * direction.values()[i];
  return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
}

const classifiers::ReferenceCNN& desk_model() {
  static const classifiers::ReferenceCNN model = [] {
    classifiers::TrainConfig cfg;
    cfg.seed = 4;
    return classifiers::train_reference(eval::make_desk_dataset(200, 11, eval::DeskConfig{}), cfg).model;
  }();
  return model;
}

core::LabeledDataset desk_test_set(std::uint64_t seed, int per_class) {
  return eval::make_desk_dataset(per_class, seed, eval::DeskConfig{});
}

}  // namespace assist::testing
