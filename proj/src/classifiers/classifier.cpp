#include "assist/classifiers/classifier.h"

#include <fmt/format.h>

#include "assist/core/errors.h"

namespace assist::classifiers {

void check_input(const Classifier& c, const Image& image) {
  const Shape want = c.input_shape();
  if (image.shape() != want) {
    throw DimensionError(fmt::format("{} expects {}x{}x3 input, got {}x{}x3", c.identity(), want.height, want.width,
                                     image.height(), image.width()));
  }
}

std::vector<ProbVector> predict_probs(const Classifier& c, std::span<const Image> batch) {
  if (batch.empty()) throw DomainError("predict_probs: empty batch");
  std::vector<ProbVector> out;
  out.reserve(batch.size());
  for (const auto& image : batch) {
    check_input(c, image);
    out.push_back(c.predict(image));
  }
  return out;
}

std::vector<PixelGrad> input_gradient(const Classifier& c, std::span<const Image> batch, const core::LossSpec& loss) {
  if (batch.empty()) throw DomainError("input_gradient: empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<PixelGrad> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    check_input(c, batch[i]);
    c.loss_gradient(batch[i], loss.target_label, out[i]);
    for (double& g : out[i].values()) g *= scale;
  }
  return out;
}

Ensemble::Ensemble(std::vector<ClassifierPtr> members) : members_(std::move(members)) {
  if (members_.empty()) throw DomainError("ensemble needs at least one member");
  for (const auto& m : members_) {
    if (!m) throw DomainError("ensemble member is null");
    if (m->num_classes() != members_.front()->num_classes() || m->input_shape() != members_.front()->input_shape()) {
      throw DimensionError(fmt::format("ensemble member {} disagrees on classes or input shape", m->identity()));
    }
  }
}

std::string Ensemble::identity() const {
  std::string id = "ensemble(";
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (i) id += ",";
    id += members_[i]->identity();
  }
  return id + ")";
}

ProbVector Ensemble::predict(const Image& image) const {
  std::vector<double> mean(static_cast<std::size_t>(num_classes()), 0.0);
  for (const auto& m : members_) {
    const ProbVector p = m->predict(image);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += p[k];
  }
  for (double& v : mean) v /= static_cast<double>(members_.size());
  return ProbVector(std::move(mean));
}

double Ensemble::loss_gradient(const Image& image, int target, PixelGrad& grad) const {
  grad = PixelGrad(image.shape());
  PixelGrad member_grad;
  double loss = 0.0;
  const double w = 1.0 / static_cast<double>(members_.size());
  for (const auto& m : members_) {
    loss += w * m->loss_gradient(image, target, member_grad);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += w * member_grad[i];
  }
  return loss;
}

std::vector<PixelGrad> ensemble_gradient(const Ensemble& e, std::span<const Image> batch, const core::LossSpec& loss) {
  return input_gradient(e, batch, loss);
}

}  // namespace assist::classifiers
