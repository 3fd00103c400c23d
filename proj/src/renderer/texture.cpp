#include "assist/renderer/texture.h"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "assist/core/errors.h"

namespace assist::renderer {

namespace {

void check_resolution(int resolution) {
  if (resolution < 4 || !std::has_single_bit(static_cast<unsigned>(resolution))) {
    throw DimensionError(fmt::format("uv texture resolution {} must be a power of two >= 4", resolution));
  }
}

std::vector<double> filled(std::size_t slots, Rgb fill) {
  std::vector<double> v(slots * 3);
  for (std::size_t s = 0; s < slots; ++s) {
    for (int ch = 0; ch < 3; ++ch) v[s * 3 + static_cast<std::size_t>(ch)] = fill[static_cast<std::size_t>(ch)];
  }
  return v;
}

}  // namespace

Texture Texture::uv(int resolution, Rgb fill) {
  check_resolution(resolution);
  return Texture(TextureKind::uv, resolution,
                 filled(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution), fill));
}

Texture Texture::vertex(std::size_t count, Rgb fill) {
  if (count == 0) throw DimensionError("vertex texture needs at least one vertex");
  return Texture(TextureKind::vertex, 0, filled(count, fill));
}

Texture Texture::from_image(const core::Image& image) {
  if (image.height() != image.width()) throw DimensionError("uv texture image must be square");
  check_resolution(image.height());
  return Texture(TextureKind::uv, image.height(), std::vector<double>(image.values().begin(), image.values().end()));
}

core::Image Texture::to_image() const {
  if (kind_ != TextureKind::uv) throw FormatError("only uv textures convert to images");
  return core::Image(core::Shape{resolution_, resolution_}, values_);
}

void Texture::check_binding(const Mesh& mesh) const {
  if (kind_ == TextureKind::uv && !mesh.has_uv()) throw FormatError("uv texture bound to a mesh without uvs");
  if (kind_ == TextureKind::vertex && slots() != mesh.vertex_count()) {
    throw FormatError(fmt::format("vertex texture has {} colors but mesh has {} vertices", slots(),
                                  mesh.vertex_count()));
  }
}

void bilinear_taps(int resolution, double u, double v, std::vector<TexelTap>& out) {
  out.clear();
  const double t = resolution;
  const double fx = std::clamp(u, 0.0, 1.0) * t - 0.5;
  const double fy = (1.0 - std::clamp(v, 0.0, 1.0)) * t - 0.5;
  const double x0f = std::floor(fx), y0f = std::floor(fy);
  const double tx = fx - x0f, ty = fy - y0f;
  const int x0 = static_cast<int>(x0f), y0 = static_cast<int>(y0f);
  const int cols[2] = {std::clamp(x0, 0, resolution - 1), std::clamp(x0 + 1, 0, resolution - 1)};
  const int rows[2] = {std::clamp(y0, 0, resolution - 1), std::clamp(y0 + 1, 0, resolution - 1)};
  const double wx[2] = {1.0 - tx, tx};
  const double wy[2] = {1.0 - ty, ty};
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const double w = wy[j] * wx[i];
      if (w == 0.0) continue;
      const auto slot = static_cast<std::uint32_t>(rows[j] * resolution + cols[i]);
      auto it = std::find_if(out.begin(), out.end(), [slot](const TexelTap& tap) { return tap.slot == slot; });
      if (it != out.end()) {
        it->weight += w;
      } else {
        out.push_back({slot, w});
      }
    }
  }
}

BilinearSample sample_bilinear(const Texture& texture, double u, double v) {
  if (texture.kind() != TextureKind::uv) throw FormatError("bilinear sampling needs a uv texture");
  BilinearSample s;
  bilinear_taps(texture.resolution(), u, v, s.taps);
  for (const auto& tap : s.taps) {
    for (int ch = 0; ch < 3; ++ch) s.rgb[static_cast<std::size_t>(ch)] += tap.weight * texture.at(tap.slot, ch);
  }
  return s;
}

}  // namespace assist::renderer
