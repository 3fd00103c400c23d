#pragma once

#include <optional>
#include <string>
#include <vector>

#include "assist/classifiers/classifier.h"
#include "assist/core/dataset.h"
#include "assist/core/numeric.h"

namespace assist::signals2d {

using classifiers::Classifier;
using core::Image;
using core::LabeledDataset;

/// x + eps * sign(grad CE(x, true_label)), clipped to [0, 1].
Image fgsm_attack(const Classifier& c, const Image& image, int true_label, double epsilon);

/// Iterated FGSM steps of size `step_size`, each projected back into the
/// eps-ball around the original image. No random start.
Image pgd_attack(const Classifier& c, const Image& image, int true_label, double epsilon, double step_size, int steps);

struct HardenedImage {
  Image image;
  double confidence_before = 0.0;
  double confidence_after = 0.0;
  int steps_taken = 0;
  /// Set when the true-class confidence went down (only possible at
  /// saturated optima).
  std::optional<std::string> warning;
};

/// Iterative descent on the cross-entropy to the true label. Stops early
/// once the true-class probability reaches 1 - 1e-12.
HardenedImage harden_image(const Classifier& c, const Image& image, int true_label, const core::OptimConfig& cfg);

struct HardenedDataset {
  LabeledDataset data;
  std::vector<std::string> warnings;
};

HardenedDataset harden_dataset(const Classifier& c, const LabeledDataset& dataset, const core::OptimConfig& cfg);

}  // namespace assist::signals2d
