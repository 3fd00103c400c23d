#include "assist/classifiers/oracles.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "assist/core/errors.h"
#include "assist/core/rng.h"

namespace assist::classifiers {

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

void check_target(int target, int num_classes) {
  if (target < 0 || target >= num_classes) {
    throw IndexError(fmt::format("target label {} outside [0, {})", target, num_classes));
  }
}

}  // namespace

std::string LogisticPixelClassifier::identity() const { return fmt::format("logistic(w={},b={})", weight_, bias_); }

ProbVector LogisticPixelClassifier::predict(const Image& image) const {
  check_input(*this, image);
  const double p1 = sigmoid(weight_ * image.at(0, 0, 0) + bias_);
  return ProbVector({1.0 - p1, p1});
}

double LogisticPixelClassifier::loss_gradient(const Image& image, int target, PixelGrad& grad) const {
  check_input(*this, image);
  check_target(target, 2);
  const ProbVector p = predict(image);
  // Logits are (0, w x + b), so d loss / d x = (p1 - [target == 1]) * w.
  const auto dlogits = core::cross_entropy_logit_grad(p, target);
  grad = PixelGrad(image.shape());
  grad.at(0, 0, 0) = dlogits[1] * weight_;
  return core::cross_entropy(p, target);
}

MeanRedProbe::MeanRedProbe(Shape input, int red_class) : input_(input), red_class_(red_class) {
  if (input.height <= 0 || input.width <= 0) throw DimensionError("probe input must be non-empty");
  check_target(red_class, 2);
}

ProbVector MeanRedProbe::predict(const Image& image) const {
  check_input(*this, image);
  double red = 0.0;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) red += image.at(r, c, 0);
  }
  const double m = std::clamp(red / static_cast<double>(image.shape().pixels()), 0.0, 1.0);
  std::vector<double> p(2);
  p[static_cast<std::size_t>(red_class_)] = m;
  p[static_cast<std::size_t>(1 - red_class_)] = 1.0 - m;
  return ProbVector(std::move(p));
}

double MeanRedProbe::loss_gradient(const Image& image, int target, PixelGrad& grad) const {
  check_target(target, 2);
  const ProbVector p = predict(image);
  const double pt = p[static_cast<std::size_t>(target)];
  grad = PixelGrad(image.shape());
  if (pt >= core::kProbFloor) {
    // d(-log p_t)/d red_i = -(1/p_t) * d p_t / d red_i, with d m / d red_i = 1/N.
    const double dm = 1.0 / static_cast<double>(image.shape().pixels());
    const double dpt = target == red_class_ ? dm : -dm;
    const double g = -dpt / pt;
    for (int r = 0; r < image.height(); ++r) {
      for (int c = 0; c < image.width(); ++c) grad.at(r, c, 0) = g;
    }
  }
  return core::cross_entropy(p, target);
}

LinearSoftmaxClassifier::LinearSoftmaxClassifier(Shape input, int num_classes, std::uint64_t seed,
                                                 double weight_scale)
    : input_(input), num_classes_(num_classes) {
  if (num_classes < 2) throw DomainError("linear softmax needs at least two classes");
  if (input.height <= 0 || input.width <= 0) throw DimensionError("input must be non-empty");
  core::Rng rng(seed);
  const std::size_t n = input.values();
  const double scale = weight_scale / std::sqrt(static_cast<double>(n));
  weights_.resize(static_cast<std::size_t>(num_classes) * n);
  for (double& w : weights_) w = scale * rng.normal();
  bias_.resize(static_cast<std::size_t>(num_classes));
  for (double& b : bias_) b = 0.1 * rng.normal();
}

std::vector<double> LinearSoftmaxClassifier::logits(const Image& image) const {
  check_input(*this, image);
  const std::size_t n = image.size();
  std::vector<double> z(bias_);
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double* w = weights_.data() + k * n;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * image[i];
    z[k] += acc;
  }
  return z;
}

ProbVector LinearSoftmaxClassifier::predict(const Image& image) const { return ProbVector::from_logits(logits(image)); }

double LinearSoftmaxClassifier::loss_gradient(const Image& image, int target, PixelGrad& grad) const {
  check_target(target, num_classes_);
  const ProbVector p = predict(image);
  const auto dz = core::cross_entropy_logit_grad(p, target);
  const std::size_t n = image.size();
  grad = PixelGrad(image.shape());
  for (std::size_t k = 0; k < dz.size(); ++k) {
    const double* w = weights_.data() + k * n;
    for (std::size_t i = 0; i < n; ++i) grad[i] += dz[k] * w[i];
  }
  return core::cross_entropy(p, target);
}

}  // namespace assist::classifiers
