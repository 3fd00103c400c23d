#pragma once

#include <cstdint>
#include <optional>

#include "assist/classifiers/reference_cnn.h"
#include "assist/core/dataset.h"

namespace assist::classifiers {

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 0.02;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct TrainResult {
  ReferenceCNN model;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
  double final_loss = 0.0;
  /// Momentum buffers at the end of training.
  CnnParamsD velocity;
};

/// Minibatch SGD with momentum on mean cross-entropy. Shuffling and weight
/// initialization come from `cfg.seed`; results are bit-identical for equal
/// inputs.
TrainResult train_reference(const core::LabeledDataset& train, const TrainConfig& cfg,
                            const core::LabeledDataset* test = nullptr);

double accuracy(const Classifier& c, const core::LabeledDataset& data);

}  // namespace assist::classifiers
