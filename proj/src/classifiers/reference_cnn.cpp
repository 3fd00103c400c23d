#include "assist/classifiers/reference_cnn.h"

#include <cmath>

#include <fmt/format.h>

#include "assist/core/errors.h"
#include "assist/core/rng.h"

namespace assist::classifiers {

namespace {

void check_architecture(Shape input, int num_classes) {
  if (input.height <= 0 || input.width <= 0 || input.height % 4 != 0 || input.width % 4 != 0) {
    throw DimensionError(fmt::format("reference CNN input {}x{} must be positive multiples of 4", input.height,
                                     input.width));
  }
  if (num_classes < 2) throw DomainError("reference CNN needs at least two classes");
}

std::size_t dense_inputs(Shape input) {
  return static_cast<std::size_t>(input.height / 4) * static_cast<std::size_t>(input.width / 4) * kConv2Filters;
}

// 3x3 same-padded convolution, channels-last; writes relu(conv) into `out`.
void conv3x3_relu(const double* in, int h, int w, int cin, const double* weight, const double* bias, int cout,
                  double* out) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double* o_ptr = out + (static_cast<std::size_t>(y) * w + x) * cout;
      for (int o = 0; o < cout; ++o) o_ptr[o] = bias[o];
      for (int ky = 0; ky < 3; ++ky) {
        const int iy = y + ky - 1;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int ix = x + kx - 1;
          if (ix < 0 || ix >= w) continue;
          const double* i_ptr = in + (static_cast<std::size_t>(iy) * w + ix) * cin;
          for (int o = 0; o < cout; ++o) {
            const double* w_ptr = weight + ((static_cast<std::size_t>(o) * 3 + ky) * 3 + kx) * cin;
            double acc = 0.0;
            for (int i = 0; i < cin; ++i) acc += w_ptr[i] * i_ptr[i];
            o_ptr[o] += acc;
          }
        }
      }
      for (int o = 0; o < cout; ++o) o_ptr[o] = o_ptr[o] > 0.0 ? o_ptr[o] : 0.0;
    }
  }
}

// Gradient of a 3x3 same-padded convolution given d(pre-activation).
void conv3x3_backward(const double* in, int h, int w, int cin, const double* weight, int cout, const double* dpre,
                      double* din, double* dweight, double* dbias) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double* d_ptr = dpre + (static_cast<std::size_t>(y) * w + x) * cout;
      if (dbias) {
        for (int o = 0; o < cout; ++o) dbias[o] += d_ptr[o];
      }
      for (int ky = 0; ky < 3; ++ky) {
        const int iy = y + ky - 1;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int ix = x + kx - 1;
          if (ix < 0 || ix >= w) continue;
          const std::size_t in_off = (static_cast<std::size_t>(iy) * w + ix) * cin;
          for (int o = 0; o < cout; ++o) {
            const double g = d_ptr[o];
            if (g == 0.0) continue;
            const std::size_t w_off = ((static_cast<std::size_t>(o) * 3 + ky) * 3 + kx) * cin;
            if (din) {
              for (int i = 0; i < cin; ++i) din[in_off + i] += weight[w_off + i] * g;
            }
            if (dweight) {
              for (int i = 0; i < cin; ++i) dweight[w_off + i] += in[in_off + i] * g;
            }
          }
        }
      }
    }
  }
}

void maxpool2(const double* in, int h, int w, int c, double* out, int* arg) {
  const int oh = h / 2, ow = w / 2;
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        int best = -1;
        double best_v = 0.0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int idx = ((2 * y + dy) * w + (2 * x + dx)) * c + ch;
            if (best < 0 || in[idx] > best_v) {
              best = idx;
              best_v = in[idx];
            }
          }
        }
        const int o = (y * ow + x) * c + ch;
        out[o] = best_v;
        arg[o] = best;
      }
    }
  }
}

template <typename T>
CnnParamsT<T> make_zeros(Shape input, int num_classes) {
  CnnParamsT<T> p;
  p.conv1_w.assign(static_cast<std::size_t>(kConv1Filters) * 9 * 3, T{0});
  p.conv1_b.assign(kConv1Filters, T{0});
  p.conv2_w.assign(static_cast<std::size_t>(kConv2Filters) * 9 * kConv1Filters, T{0});
  p.conv2_b.assign(kConv2Filters, T{0});
  p.dense_w.assign(static_cast<std::size_t>(num_classes) * dense_inputs(input), T{0});
  p.dense_b.assign(static_cast<std::size_t>(num_classes), T{0});
  return p;
}

}  // namespace

template <typename T>
CnnParamsT<T> CnnParamsT<T>::zeros(Shape input, int num_classes) {
  check_architecture(input, num_classes);
  return make_zeros<T>(input, num_classes);
}

template <typename T>
std::size_t CnnParamsT<T>::count() const {
  std::size_t n = 0;
  for (const auto* b : blobs()) n += b->size();
  return n;
}

template struct CnnParamsT<float>;
template struct CnnParamsT<double>;

std::vector<LayerInfo> cnn_layers(Shape input, int num_classes) {
  check_architecture(input, num_classes);
  return {
      {"conv1.weight", {kConv1Filters, 3, 3, 3}},
      {"conv1.bias", {kConv1Filters}},
      {"conv2.weight", {kConv2Filters, 3, 3, kConv1Filters}},
      {"conv2.bias", {kConv2Filters}},
      {"dense.weight", {num_classes, static_cast<int>(dense_inputs(input))}},
      {"dense.bias", {num_classes}},
  };
}

ReferenceCNN::ReferenceCNN(Shape input, int num_classes, CnnParams params, std::uint64_t seed)
    : input_(input), num_classes_(num_classes), params_(std::move(params)), seed_(seed) {
  check_architecture(input, num_classes);
  const auto layers = cnn_layers(input, num_classes);
  const auto blobs = params_.blobs();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::size_t want = 1;
    for (int d : layers[i].shape) want *= static_cast<std::size_t>(d);
    if (blobs[i]->size() != want) {
      throw DimensionError(fmt::format("{} has {} values, expected {}", layers[i].name, blobs[i]->size(), want));
    }
  }
  auto dst = weights_.blobs();
  for (std::size_t i = 0; i < blobs.size(); ++i) dst[i]->assign(blobs[i]->begin(), blobs[i]->end());
}

ReferenceCNN ReferenceCNN::initialize(Shape input, int num_classes, std::uint64_t seed) {
  auto p = CnnParams::zeros(input, num_classes);
  core::Rng rng(seed);
  auto fill = [](std::vector<float>& w, core::Rng r, double fan_in) {
    const double stddev = std::sqrt(2.0 / fan_in);
    for (float& v : w) v = static_cast<float>(stddev * r.normal());
  };
  fill(p.conv1_w, rng.split("conv1"), 27.0);
  fill(p.conv2_w, rng.split("conv2"), 9.0 * kConv1Filters);
  fill(p.dense_w, rng.split("dense"), 2.0 * static_cast<double>(dense_inputs(input)));
  return ReferenceCNN(input, num_classes, std::move(p), seed);
}

std::string ReferenceCNN::identity() const {
  return fmt::format("{}[{}x{},{}cls,seed={}]", kReferenceArchitecture, input_.height, input_.width, num_classes_,
                     seed_);
}

ProbVector ReferenceCNN::predict(const Image& image) const {
  check_input(*this, image);
  detail::CnnCache cache;
  detail::cnn_forward(weights_, input_, num_classes_, image, cache);
  return ProbVector::from_logits(cache.logits);
}

double ReferenceCNN::loss_gradient(const Image& image, int target, PixelGrad& grad) const {
  check_input(*this, image);
  detail::CnnCache cache;
  detail::cnn_forward(weights_, input_, num_classes_, image, cache);
  const ProbVector p = ProbVector::from_logits(cache.logits);
  const double loss = core::cross_entropy(p, target);
  const auto dlogits = core::cross_entropy_logit_grad(p, target);
  grad = PixelGrad(image.shape());
  detail::cnn_backward(weights_, input_, num_classes_, image, cache, dlogits, &grad, nullptr);
  return loss;
}

std::vector<std::int32_t> ReferenceCNN::activation_pattern(const Image& image) const {
  check_input(*this, image);
  detail::CnnCache cache;
  detail::cnn_forward(weights_, input_, num_classes_, image, cache);
  std::vector<std::int32_t> pattern;
  pattern.reserve(cache.conv1.size() + cache.conv2.size() + cache.pool1_arg.size() + cache.pool2_arg.size());
  for (double v : cache.conv1) pattern.push_back(v > 0.0);
  for (double v : cache.conv2) pattern.push_back(v > 0.0);
  pattern.insert(pattern.end(), cache.pool1_arg.begin(), cache.pool1_arg.end());
  pattern.insert(pattern.end(), cache.pool2_arg.begin(), cache.pool2_arg.end());
  return pattern;
}

namespace detail {

void cnn_forward(const CnnParamsD& w, Shape input, int num_classes, const Image& image, CnnCache& cache) {
  const int h = input.height, wd = input.width;
  const int h2 = h / 2, w2 = wd / 2, h4 = h / 4, w4 = wd / 4;
  cache.conv1.resize(static_cast<std::size_t>(h) * wd * kConv1Filters);
  cache.pool1.resize(static_cast<std::size_t>(h2) * w2 * kConv1Filters);
  cache.pool1_arg.resize(cache.pool1.size());
  cache.conv2.resize(static_cast<std::size_t>(h2) * w2 * kConv2Filters);
  cache.pool2.resize(static_cast<std::size_t>(h4) * w4 * kConv2Filters);
  cache.pool2_arg.resize(cache.pool2.size());

  conv3x3_relu(image.values().data(), h, wd, 3, w.conv1_w.data(), w.conv1_b.data(), kConv1Filters,
               cache.conv1.data());
  maxpool2(cache.conv1.data(), h, wd, kConv1Filters, cache.pool1.data(), cache.pool1_arg.data());
  conv3x3_relu(cache.pool1.data(), h2, w2, kConv1Filters, w.conv2_w.data(), w.conv2_b.data(), kConv2Filters,
               cache.conv2.data());
  maxpool2(cache.conv2.data(), h2, w2, kConv2Filters, cache.pool2.data(), cache.pool2_arg.data());

  const std::size_t n = cache.pool2.size();
  cache.logits.assign(w.dense_b.begin(), w.dense_b.end());
  for (int k = 0; k < num_classes; ++k) {
    const double* row = w.dense_w.data() + static_cast<std::size_t>(k) * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * cache.pool2[j];
    cache.logits[static_cast<std::size_t>(k)] += acc;
  }
}

void cnn_backward(const CnnParamsD& w, Shape input, int num_classes, const Image& image, const CnnCache& cache,
                  const std::vector<double>& dlogits, PixelGrad* dinput, CnnParamsD* dparams) {
  const int h = input.height, wd = input.width;
  const int h2 = h / 2, w2 = wd / 2;
  const std::size_t n = cache.pool2.size();

  std::vector<double> dpool2(n, 0.0);
  for (int k = 0; k < num_classes; ++k) {
    const double g = dlogits[static_cast<std::size_t>(k)];
    if (g == 0.0) continue;
    const double* row = w.dense_w.data() + static_cast<std::size_t>(k) * n;
    for (std::size_t j = 0; j < n; ++j) dpool2[j] += row[j] * g;
    if (dparams) {
      double* drow = dparams->dense_w.data() + static_cast<std::size_t>(k) * n;
      for (std::size_t j = 0; j < n; ++j) drow[j] += cache.pool2[j] * g;
      dparams->dense_b[static_cast<std::size_t>(k)] += g;
    }
  }

  // Unpool into the winning positions; relu gate uses the stored activation.
  std::vector<double> dconv2(cache.conv2.size(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto idx = static_cast<std::size_t>(cache.pool2_arg[j]);
    if (cache.conv2[idx] > 0.0) dconv2[idx] += dpool2[j];
  }

  std::vector<double> dpool1(cache.pool1.size(), 0.0);
  conv3x3_backward(cache.pool1.data(), h2, w2, kConv1Filters, w.conv2_w.data(), kConv2Filters, dconv2.data(),
                   dpool1.data(), dparams ? dparams->conv2_w.data() : nullptr,
                   dparams ? dparams->conv2_b.data() : nullptr);

  std::vector<double> dconv1(cache.conv1.size(), 0.0);
  for (std::size_t j = 0; j < dpool1.size(); ++j) {
    const auto idx = static_cast<std::size_t>(cache.pool1_arg[j]);
    if (cache.conv1[idx] > 0.0) dconv1[idx] += dpool1[j];
  }

  double* din = nullptr;
  if (dinput) {
    if (dinput->shape() != input) *dinput = PixelGrad(input);
    din = dinput->values().data();
  }
  if (!din && !dparams) return;
  conv3x3_backward(image.values().data(), h, wd, 3, w.conv1_w.data(), kConv1Filters, dconv1.data(), din,
                   dparams ? dparams->conv1_w.data() : nullptr, dparams ? dparams->conv1_b.data() : nullptr);
}

}  // namespace detail

}  // namespace assist::classifiers
