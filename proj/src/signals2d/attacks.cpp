#include "assist/signals2d/attacks.h"

#include <cmath>

#include <fmt/format.h>

#include "assist/core/errors.h"

namespace assist::signals2d {

namespace {

core::PixelGrad true_label_gradient(const Classifier& c, const Image& image, int label) {
  classifiers::check_input(c, image);
  core::PixelGrad g;
  c.loss_gradient(image, label, g);
  return g;
}

void check_label(const Classifier& c, int label) {
  if (label < 0 || label >= c.num_classes()) {
    throw IndexError(fmt::format("label {} outside [0, {})", label, c.num_classes()));
  }
}

}  // namespace

Image fgsm_attack(const Classifier& c, const Image& image, int true_label, double epsilon) {
  if (!(epsilon >= 0.0)) throw DomainError("fgsm: epsilon must be non-negative");
  check_label(c, true_label);
  const auto g = true_label_gradient(c, image, true_label);
  Image out = image;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += epsilon * core::sign(g[i]);
  core::clip_unit_inplace(out.values());
  return out;
}

Image pgd_attack(const Classifier& c, const Image& image, int true_label, double epsilon, double step_size, int steps) {
  if (!(epsilon >= 0.0)) throw DomainError("pgd: epsilon must be non-negative");
  if (steps < 0) throw DomainError("pgd: steps must be non-negative");
  check_label(c, true_label);
  classifiers::check_input(c, image);
  Image x = image;
  for (int s = 0; s < steps; ++s) {
    const auto g = true_label_gradient(c, x, true_label);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += step_size * core::sign(g[i]);
    core::clip_unit_inplace(x.values());
    core::project_linf_inplace(x.values(), image.values(), epsilon);
  }
  return x;
}

HardenedImage harden_image(const Classifier& c, const Image& image, int true_label, const core::OptimConfig& cfg) {
  core::validate(cfg);
  check_label(c, true_label);
  classifiers::check_input(c, image);
  HardenedImage out{image, 0.0, 0.0, 0, std::nullopt};
  const auto label = static_cast<std::size_t>(true_label);
  out.confidence_before = c.predict(image)[label];
  core::PixelGrad g;
  for (int it = 0; it < cfg.iterations; ++it) {
    const double loss = c.loss_gradient(out.image, true_label, g);
    if (std::exp(-loss) >= 1.0 - core::kProbFloor) break;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double step = cfg.use_sign_gradient ? core::sign(g[i]) : g[i];
      out.image[i] -= cfg.step_size * step;
    }
    core::clip_unit_inplace(out.image.values());
    if (cfg.epsilon) core::project_linf_inplace(out.image.values(), image.values(), *cfg.epsilon);
    ++out.steps_taken;
  }
  const double confidence = out.steps_taken ? c.predict(out.image)[label] : out.confidence_before;
  out.confidence_after = confidence;
  if (out.confidence_after < out.confidence_before) {
    out.warning = fmt::format("true-class confidence dropped {:.6g} -> {:.6g}", out.confidence_before,
                              out.confidence_after);
  }
  return out;
}

HardenedDataset harden_dataset(const Classifier& c, const LabeledDataset& dataset, const core::OptimConfig& cfg) {
  HardenedDataset out{LabeledDataset(dataset.num_classes()), {}};
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    try {
      auto h = harden_image(c, dataset[i].image, dataset[i].label, cfg);
      if (h.warning) out.warnings.push_back(fmt::format("item {}: {}", i, *h.warning));
      out.data.add(std::move(h.image), dataset[i].label);
    } catch (const std::exception&) {
      rethrow_with_context(fmt::format("harden_dataset item {}", i));
    }
  }
  return out;
}

}  // namespace assist::signals2d
