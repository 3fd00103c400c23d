#include "assist/core/numeric.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "assist/core/errors.h"

namespace assist::core {

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw DomainError("probability vector must be non-empty");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw DomainError("probabilities must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) throw DomainError(fmt::format("probabilities sum to {}, expected 1", total));
}

ProbVector ProbVector::from_logits(std::span<const double> logits) {
  if (logits.empty()) throw DomainError("softmax of empty logits");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return ProbVector(std::move(p));
}

void validate(const OptimConfig& cfg) {
  if (!(cfg.step_size > 0.0)) throw ConfigError("step_size must be positive");
  if (cfg.iterations < 0) throw ConfigError("iterations must be non-negative");
  if (cfg.epsilon && !(*cfg.epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
}

double cross_entropy(const ProbVector& probs, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= probs.size()) {
    throw IndexError(fmt::format("target label {} outside [0, {})", target, probs.size()));
  }
  return -std::log(std::max(probs[static_cast<std::size_t>(target)], kProbFloor));
}

std::vector<double> cross_entropy_logit_grad(const ProbVector& probs, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= probs.size()) {
    throw IndexError(fmt::format("target label {} outside [0, {})", target, probs.size()));
  }
  std::vector<double> g(probs.size(), 0.0);
  if (probs[static_cast<std::size_t>(target)] < kProbFloor) return g;  // floored branch is flat
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = probs[i];
  g[static_cast<std::size_t>(target)] -= 1.0;
  return g;
}

int argmax_label(std::span<const double> probs) {
  if (probs.empty()) throw DomainError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return static_cast<int>(best);
}

void clip_unit_inplace(std::span<double> values) {
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
}

Image clip_unit(const Raster& image) {
  Image out(image.shape(), std::vector<double>(image.values().begin(), image.values().end()));
  clip_unit_inplace(out.values());
  return out;
}

void project_linf_inplace(std::span<double> values, std::span<const double> origin, double epsilon) {
  if (values.size() != origin.size()) throw DimensionError("project_linf: size mismatch");
  if (!(epsilon >= 0.0)) throw DomainError("project_linf: epsilon must be non-negative");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double lo = std::max(origin[i] - epsilon, 0.0);
    const double hi = std::min(origin[i] + epsilon, 1.0);
    // An origin outside [0,1] can make lo > hi; the unit interval wins.
    values[i] = lo <= hi ? std::clamp(values[i], lo, hi) : std::clamp(origin[i], 0.0, 1.0);
  }
}

Image project_linf(const Raster& image, const Raster& origin, double epsilon) {
  require_same_shape(image.shape(), origin.shape(), "project_linf");
  Image out(image.shape(), std::vector<double>(image.values().begin(), image.values().end()));
  project_linf_inplace(out.values(), origin.values(), epsilon);
  return out;
}

}  // namespace assist::core
