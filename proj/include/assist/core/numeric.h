#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "assist/core/image.h"

namespace assist::core {

/// Probability floor applied before taking logs.
inline constexpr double kProbFloor = 1e-12;

/// Class probabilities; entries non-negative and summing to one.
class ProbVector {
 public:
  ProbVector() = default;
  explicit ProbVector(std::vector<double> probs);

  /// Softmax with max-subtraction.
  static ProbVector from_logits(std::span<const double> logits);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> values() const { return probs_; }

 private:
  std::vector<double> probs_;
};

enum class Direction { assistive, deceptive };

/// Which label the cross-entropy is measured against and which way the
/// optimizer moves it. Assistive descends the loss, deceptive ascends it
/// (untargeted, target = true label) or descends it toward a wrong label.
struct LossSpec {
  int target_label = 0;
  Direction direction = Direction::assistive;
  bool targeted = false;

  /// +1 when the optimizer should step along the loss gradient, -1 when it
  /// should step against it.
  double ascent_sign() const { return direction == Direction::deceptive && !targeted ? 1.0 : -1.0; }
};

struct OptimConfig {
  double step_size = 0.01;
  int iterations = 10;
  std::optional<double> epsilon;
  bool use_sign_gradient = true;
  std::uint64_t seed = 0;
};

void validate(const OptimConfig& cfg);

double cross_entropy(const ProbVector& probs, int target);

/// d cross_entropy / d logits for a softmax head: p - onehot(target), or zero
/// when the target probability sits below the floor.
std::vector<double> cross_entropy_logit_grad(const ProbVector& probs, int target);

int argmax_label(std::span<const double> probs);
inline int argmax_label(const ProbVector& probs) { return argmax_label(probs.values()); }

Image clip_unit(const Raster& image);
void clip_unit_inplace(std::span<double> values);

/// Clamp into [origin - eps, origin + eps] intersected with [0, 1].
Image project_linf(const Raster& image, const Raster& origin, double epsilon);
void project_linf_inplace(std::span<double> values, std::span<const double> origin, double epsilon);

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace assist::core
