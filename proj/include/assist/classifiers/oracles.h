#pragma once

#include <cstdint>
#include <vector>

#include "assist/classifiers/classifier.h"

namespace assist::classifiers {

/// Two-class model on a 1x1 image: p(class 1) = sigmoid(weight * red + bias).
/// Closed-form gradients make it the reference for attack/hardening math.
class LogisticPixelClassifier final : public Classifier {
 public:
  LogisticPixelClassifier(double weight, double bias) : weight_(weight), bias_(bias) {}

  int num_classes() const override { return 2; }
  Shape input_shape() const override { return {1, 1}; }
  std::string identity() const override;
  ProbVector predict(const Image& image) const override;
  double loss_gradient(const Image& image, int target, PixelGrad& grad) const override;

 private:
  double weight_;
  double bias_;
};

/// Two-class probe whose `red_class` probability equals the mean red value
/// of the whole image. Its optimum (everything red) is known analytically.
class MeanRedProbe final : public Classifier {
 public:
  explicit MeanRedProbe(Shape input, int red_class = 1);

  int num_classes() const override { return 2; }
  Shape input_shape() const override { return input_; }
  std::string identity() const override { return "mean-red-probe"; }
  ProbVector predict(const Image& image) const override;
  double loss_gradient(const Image& image, int target, PixelGrad& grad) const override;

 private:
  Shape input_;
  int red_class_;
};

/// Softmax over a dense layer with seeded random weights. Smooth everywhere,
/// which makes it the probe of choice for finite-difference checks.
class LinearSoftmaxClassifier final : public Classifier {
 public:
  LinearSoftmaxClassifier(Shape input, int num_classes, std::uint64_t seed, double weight_scale = 1.0);

  int num_classes() const override { return num_classes_; }
  Shape input_shape() const override { return input_; }
  std::string identity() const override { return "linear-softmax"; }
  ProbVector predict(const Image& image) const override;
  double loss_gradient(const Image& image, int target, PixelGrad& grad) const override;

 private:
  std::vector<double> logits(const Image& image) const;

  Shape input_;
  int num_classes_;
  std::vector<double> weights_;  // [class][pixel value]
  std::vector<double> bias_;
};

}  // namespace assist::classifiers
