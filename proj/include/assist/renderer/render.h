#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "assist/core/image.h"
#include "assist/renderer/scene.h"

namespace assist::renderer {

/// Sparse map from texture slots to the pixels of one view. Covered pixel p
/// has value sum_k taps[k].weight * texture[taps[k].slot] (per channel) for
/// k in [offsets[p], offsets[p + 1]); uncovered pixels have no taps and show
/// the background.
struct ViewJacobian {
  std::vector<std::uint32_t> offsets;
  std::vector<TexelTap> taps;

  bool covered(std::size_t pixel) const { return offsets[pixel + 1] > offsets[pixel]; }
};

struct RenderedBatch {
  std::vector<core::Image> images;
  std::vector<ViewJacobian> jacobians;
  core::Shape image_size;
  TextureKind kind = TextureKind::vertex;
  std::size_t texture_slots = 0;
  Rgb background{};
};

/// Per camera: look-at view transform, perspective projection, hard z-buffer
/// visibility, perspective-correct barycentric interpolation of uvs or vertex
/// colors, and Lambert + ambient shading. Geometry and lighting only decide
/// the jacobian; pixels are then exactly linear in the texture.
RenderedBatch render_batch(const Scene& scene);

/// Re-evaluates the images of `batch` for another texture of the same layout.
std::vector<core::Image> apply_jacobian(const RenderedBatch& batch, const Texture& texture);

/// Transpose of the jacobian: scatter-adds pixel gradients into texture
/// slots, summed over views, in pixel-major then tap order.
std::vector<double> texture_gradient(const RenderedBatch& batch, std::span<const core::PixelGrad> pixel_grads);

}  // namespace assist::renderer
