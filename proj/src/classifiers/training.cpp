#include "assist/classifiers/training.h"

#include <numeric>

#include "assist/core/errors.h"
#include "assist/core/rng.h"

namespace assist::classifiers {

double accuracy(const Classifier& c, const core::LabeledDataset& data) {
  if (data.empty()) throw DomainError("accuracy of an empty dataset");
  std::size_t hits = 0;
  for (const auto& item : data) {
    check_input(c, item.image);
    if (core::argmax_label(c.predict(item.image)) == item.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

TrainResult train_reference(const core::LabeledDataset& train, const TrainConfig& cfg,
                            const core::LabeledDataset* test) {
  if (train.empty()) throw DomainError("train_reference: empty dataset");
  if (cfg.epochs < 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0.0)) {
    throw ConfigError("train_reference: epochs >= 0, batch_size > 0 and learning_rate > 0 required");
  }
  const Shape input = train[0].image.shape();
  const int classes = train.num_classes();
  const ReferenceCNN init = ReferenceCNN::initialize(input, classes, cfg.seed);

  CnnParamsD weights;
  {
    auto dst = weights.blobs();
    const auto src = init.params().blobs();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->assign(src[i]->begin(), src[i]->end());
  }
  CnnParamsD velocity = CnnParamsD::zeros(input, classes);
  CnnParamsD grad = CnnParamsD::zeros(input, classes);

  core::Rng shuffle_rng = core::Rng(cfg.seed).split("shuffle");
  std::vector<std::size_t> order(train.size());
  detail::CnnCache cache;
  double last_loss = 0.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (auto* b : grad.blobs()) std::fill(b->begin(), b->end(), 0.0);
      for (std::size_t k = start; k < stop; ++k) {
        const auto& item = train[order[k]];
        core::require_same_shape(item.image.shape(), input, "train_reference");
        detail::cnn_forward(weights, input, classes, item.image, cache);
        const ProbVector p = ProbVector::from_logits(cache.logits);
        epoch_loss += core::cross_entropy(p, item.label);
        detail::cnn_backward(weights, input, classes, item.image, cache, core::cross_entropy_logit_grad(p, item.label),
                             nullptr, &grad);
      }
      const double scale = cfg.learning_rate / static_cast<double>(stop - start);
      auto w = weights.blobs();
      auto v = velocity.blobs();
      const auto g = grad.blobs();
      for (std::size_t b = 0; b < w.size(); ++b) {
        for (std::size_t i = 0; i < w[b]->size(); ++i) {
          (*v[b])[i] = cfg.momentum * (*v[b])[i] - scale * (*g[b])[i];
          (*w[b])[i] += (*v[b])[i];
        }
      }
    }
    last_loss = epoch_loss / static_cast<double>(train.size());
  }

  CnnParams stored;
  {
    auto dst = stored.blobs();
    const auto src = weights.blobs();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i]->resize(src[i]->size());
      for (std::size_t k = 0; k < src[i]->size(); ++k) (*dst[i])[k] = static_cast<float>((*src[i])[k]);
    }
  }
  ReferenceCNN model(input, classes, std::move(stored), cfg.seed);
  TrainResult result{model, accuracy(model, train), std::nullopt, last_loss, std::move(velocity)};
  if (test && !test->empty()) result.test_accuracy = accuracy(model, *test);
  return result;
}

}  // namespace assist::classifiers
