#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "assist/core/image.h"
#include "assist/core/numeric.h"

namespace assist::classifiers {

using core::Image;
using core::PixelGrad;
using core::ProbVector;
using core::Shape;

/// Maps images to class probabilities and exposes the input gradient of the
/// cross-entropy loss. Implementations are immutable once built, so const
/// calls may run concurrently.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual int num_classes() const = 0;
  virtual Shape input_shape() const = 0;
  virtual std::string identity() const = 0;

  virtual ProbVector predict(const Image& image) const = 0;

  /// Cross-entropy of the prediction against `target`; writes
  /// d loss / d pixels into `grad` (resized to the input shape).
  virtual double loss_gradient(const Image& image, int target, PixelGrad& grad) const = 0;
};

using ClassifierPtr = std::shared_ptr<const Classifier>;

/// Throws DimensionError unless the image matches the classifier input.
void check_input(const Classifier& c, const Image& image);

std::vector<ProbVector> predict_probs(const Classifier& c, std::span<const Image> batch);

/// Gradient of the batch-mean cross-entropy to `loss.target_label`, one
/// entry per input image.
std::vector<PixelGrad> input_gradient(const Classifier& c, std::span<const Image> batch, const core::LossSpec& loss);

/// Averages member losses and member gradients; predictions are the mean of
/// member probability vectors.
class Ensemble final : public Classifier {
 public:
  explicit Ensemble(std::vector<ClassifierPtr> members);

  int num_classes() const override { return members_.front()->num_classes(); }
  Shape input_shape() const override { return members_.front()->input_shape(); }
  std::string identity() const override;
  ProbVector predict(const Image& image) const override;
  double loss_gradient(const Image& image, int target, PixelGrad& grad) const override;

  const std::vector<ClassifierPtr>& members() const { return members_; }

 private:
  std::vector<ClassifierPtr> members_;
};

std::vector<PixelGrad> ensemble_gradient(const Ensemble& e, std::span<const Image> batch, const core::LossSpec& loss);

}  // namespace assist::classifiers
