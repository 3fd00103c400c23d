#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "assist/core/image.h"
#include "assist/renderer/mesh.h"

namespace assist::renderer {

enum class TextureKind { uv, vertex };

using Rgb = std::array<double, 3>;

/// Optimizable albedo. UV textures are square T x T rasters (T a power of two,
/// at least 4) with slot = row * T + col and row 0 at v = 1 (OBJ/PNG
/// convention). Vertex textures hold one RGB per mesh vertex.
class Texture {
 public:
  static Texture uv(int resolution, Rgb fill = {0.5, 0.5, 0.5});
  static Texture vertex(std::size_t count, Rgb fill = {0.5, 0.5, 0.5});
  static Texture from_image(const core::Image& image);

  TextureKind kind() const { return kind_; }
  int resolution() const { return resolution_; }
  std::size_t slots() const { return values_.size() / 3; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& at(std::size_t slot, int ch) { return values_[slot * 3 + static_cast<std::size_t>(ch)]; }
  double at(std::size_t slot, int ch) const { return values_[slot * 3 + static_cast<std::size_t>(ch)]; }

  std::size_t texel_slot(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(resolution_) + static_cast<std::size_t>(col);
  }

  /// UV textures only.
  core::Image to_image() const;

  /// Throws unless this texture can be bound to `mesh` (UV presence or vertex
  /// count).
  void check_binding(const Mesh& mesh) const;

  bool operator==(const Texture&) const = default;

 private:
  Texture(TextureKind kind, int resolution, std::vector<double> values)
      : kind_(kind), resolution_(resolution), values_(std::move(values)) {}

  TextureKind kind_;
  int resolution_;
  std::vector<double> values_;
};

struct TexelTap {
  std::uint32_t slot;
  double weight;
};

struct BilinearSample {
  Rgb rgb{};
  /// Distinct texels with non-zero weight; weights sum to 1.
  std::vector<TexelTap> taps;
};

/// Bilinear lookup between the four nearest texel centers; addresses clamp at
/// the borders.
BilinearSample sample_bilinear(const Texture& texture, double u, double v);

/// Writes (u, v) bilinear taps into `out` (cleared first).
void bilinear_taps(int resolution, double u, double v, std::vector<TexelTap>& out);

}  // namespace assist::renderer
