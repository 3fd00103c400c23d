#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace assist::core {

struct Shape {
  int height = 0;
  int width = 0;

  bool operator==(const Shape&) const = default;
  std::size_t pixels() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
  std::size_t values() const { return pixels() * 3; }
};

/// Dense H x W x 3 raster of doubles, row-major, channels interleaved.
class Raster {
 public:
  Raster() = default;
  Raster(Shape shape, double fill = 0.0);
  Raster(Shape shape, std::vector<double> values);

  Shape shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int row, int col, int ch) { return data_[index(row, col, ch)]; }
  double at(int row, int col, int ch) const { return data_[index(row, col, ch)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(shape_.width) + static_cast<std::size_t>(col)) * 3 +
           static_cast<std::size_t>(ch);
  }

  bool operator==(const Raster&) const = default;

 private:
  Shape shape_{};
  std::vector<double> data_;
};

/// Unit-range RGB image. Public operations that produce an Image keep every
/// value inside [0, 1].
class Image : public Raster {
 public:
  using Raster::Raster;
};

/// Unconstrained per-pixel quantity with image layout (loss gradients,
/// perturbations).
class PixelGrad : public Raster {
 public:
  using Raster::Raster;
};

/// Throws DimensionError when the two shapes differ.
void require_same_shape(Shape a, Shape b, const char* what);

/// Bilinear resize with pixel-center alignment.
Image resize_bilinear(const Image& image, Shape target);

double max_abs_diff(const Raster& a, const Raster& b);

}  // namespace assist::core
