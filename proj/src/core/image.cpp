#include "assist/core/image.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "assist/core/errors.h"

namespace assist::core {

Raster::Raster(Shape shape, double fill) : shape_(shape) {
  if (shape.height < 0 || shape.width < 0) throw DimensionError("raster dimensions must be non-negative");
  data_.assign(shape.values(), fill);
}

Raster::Raster(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
  if (shape.height < 0 || shape.width < 0) throw DimensionError("raster dimensions must be non-negative");
  if (data_.size() != shape.values()) {
    throw DimensionError(fmt::format("raster {}x{}x3 needs {} values, got {}", shape.height, shape.width,
                                     shape.values(), data_.size()));
  }
}

void require_same_shape(Shape a, Shape b, const char* what) {
  if (a != b) {
    throw DimensionError(fmt::format("{}: shape mismatch {}x{} vs {}x{}", what, a.height, a.width, b.height, b.width));
  }
}

Image resize_bilinear(const Image& image, Shape target) {
  if (target.height <= 0 || target.width <= 0) throw DimensionError("resize target must be positive");
  if (image.empty()) throw DimensionError("cannot resize an empty image");
  Image out(target);
  const double sy = static_cast<double>(image.height()) / target.height;
  const double sx = static_cast<double>(image.width()) / target.width;
  for (int r = 0; r < target.height; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double ty = fy - y0;
    for (int c = 0; c < target.width; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double tx = fx - x0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = image.at(y0, x0, ch) * (1 - tx) + image.at(y0, x1, ch) * tx;
        const double bottom = image.at(y1, x0, ch) * (1 - tx) + image.at(y1, x1, ch) * tx;
        out.at(r, c, ch) = std::clamp(top * (1 - ty) + bottom * ty, 0.0, 1.0);
      }
    }
  }
  return out;
}

double max_abs_diff(const Raster& a, const Raster& b) {
  require_same_shape(a.shape(), b.shape(), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace assist::core
