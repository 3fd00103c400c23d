#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "assist/classifiers/classifier.h"

namespace assist::classifiers {

inline constexpr int kConv1Filters = 8;
inline constexpr int kConv2Filters = 16;
inline constexpr const char* kReferenceArchitecture = "reference-cnn-v1";

/// conv3x3x8 -> relu -> maxpool2 -> conv3x3x16 -> relu -> maxpool2 -> dense.
/// Convolutions are stride 1 with zero padding 1. Weight layouts:
///   conv: [out][ky][kx][in], dense: [class][pooled feature (HWC order)].
template <typename T>
struct CnnParamsT {
  std::vector<T> conv1_w, conv1_b;
  std::vector<T> conv2_w, conv2_b;
  std::vector<T> dense_w, dense_b;

  static CnnParamsT zeros(Shape input, int num_classes);

  std::array<std::vector<T>*, 6> blobs() { return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &dense_w, &dense_b}; }
  std::array<const std::vector<T>*, 6> blobs() const {
    return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &dense_w, &dense_b};
  }
  std::size_t count() const;

  bool operator==(const CnnParamsT&) const = default;
};

using CnnParams = CnnParamsT<float>;
using CnnParamsD = CnnParamsT<double>;

struct LayerInfo {
  std::string name;
  std::vector<int> shape;
};

/// Declared blob names and shapes in storage order.
std::vector<LayerInfo> cnn_layers(Shape input, int num_classes);

/// Weights are stored as float32 (the checkpoint precision); arithmetic runs
/// in double.
class ReferenceCNN final : public Classifier {
 public:
  ReferenceCNN(Shape input, int num_classes, CnnParams params, std::uint64_t seed = 0);

  /// He-normal convolution/dense weights and zero biases from `seed`.
  static ReferenceCNN initialize(Shape input, int num_classes, std::uint64_t seed);

  int num_classes() const override { return num_classes_; }
  Shape input_shape() const override { return input_; }
  std::string identity() const override;
  ProbVector predict(const Image& image) const override;
  double loss_gradient(const Image& image, int target, PixelGrad& grad) const override;

  const CnnParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  /// ReLU on/off bits and max-pool winners for `image`. Two inputs with equal
  /// patterns lie in the same linear region of the network.
  std::vector<std::int32_t> activation_pattern(const Image& image) const;

 private:
  Shape input_;
  int num_classes_;
  CnnParams params_;
  CnnParamsD weights_;
  std::uint64_t seed_;
};

namespace detail {

struct CnnCache {
  std::vector<double> conv1, pool1;
  std::vector<int> pool1_arg;
  std::vector<double> conv2, pool2;
  std::vector<int> pool2_arg;
  std::vector<double> logits;
};

void cnn_forward(const CnnParamsD& w, Shape input, int num_classes, const Image& image, CnnCache& cache);

/// Backpropagates d loss / d logits. Either output may be null.
void cnn_backward(const CnnParamsD& w, Shape input, int num_classes, const Image& image, const CnnCache& cache,
                  const std::vector<double>& dlogits, PixelGrad* dinput, CnnParamsD* dparams);

}  // namespace detail

}  // namespace assist::classifiers
