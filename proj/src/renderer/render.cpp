#include "assist/renderer/render.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "assist/core/errors.h"

namespace assist::renderer {

namespace {

constexpr double kNearDepth = 1e-3;

struct ScreenVertex {
  double x = 0, y = 0;  // continuous pixel coordinates, pixel centers at i + 0.5
  double depth = 0;     // distance along the viewing axis
  bool valid = false;
};

struct Fragment {
  int face = -1;
  double depth = std::numeric_limits<double>::infinity();
  std::array<double, 3> bary{};  // perspective-correct
};

ViewJacobian rasterize_view(const Scene& scene, const Camera& camera, const Light& light) {
  const Mesh& mesh = *scene.mesh;
  const int h = scene.image_size.height, w = scene.image_size.width;

  const Vec3 eye = camera.position();
  const Vec3 forward = (-eye).normalized();
  Vec3 world_up(0.0, 1.0, 0.0);
  if (forward.cross(world_up).norm() < 1e-9) world_up = Vec3(0.0, 0.0, forward.y() > 0 ? 1.0 : -1.0);
  const Vec3 right = forward.cross(world_up).normalized();
  const Vec3 up = right.cross(forward);
  const double focal = 1.0 / std::tan(camera.fov_y_deg * std::numbers::pi / 360.0);
  const double aspect = static_cast<double>(w) / h;

  std::vector<ScreenVertex> screen(mesh.vertex_count());
  for (std::size_t i = 0; i < screen.size(); ++i) {
    const Vec3 rel = mesh.vertices()[i] - eye;
    const double depth = rel.dot(forward);
    if (depth <= kNearDepth) continue;
    const double ndc_x = focal * rel.dot(right) / depth / aspect;
    const double ndc_y = focal * rel.dot(up) / depth;
    screen[i] = {(ndc_x + 1.0) * 0.5 * w, (1.0 - ndc_y) * 0.5 * h, depth, true};
  }

  std::vector<Fragment> frags(static_cast<std::size_t>(h) * static_cast<std::size_t>(w));
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces()[f];
    const ScreenVertex& a = screen[static_cast<std::size_t>(face[0])];
    const ScreenVertex& b = screen[static_cast<std::size_t>(face[1])];
    const ScreenVertex& c = screen[static_cast<std::size_t>(face[2])];
    if (!a.valid || !b.valid || !c.valid) continue;  // crosses the near plane
    const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (std::abs(area) < 1e-12) continue;
    const int x_lo = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}) - 0.5)));
    const int x_hi = std::min(w - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}) - 0.5)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}) - 0.5)));
    const int y_hi = std::min(h - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}) - 0.5)));
    for (int py = y_lo; py <= y_hi; ++py) {
      const double sy = py + 0.5;
      for (int px = x_lo; px <= x_hi; ++px) {
        const double sx = px + 0.5;
        double l0 = ((b.x - sx) * (c.y - sy) - (b.y - sy) * (c.x - sx)) / area;
        double l1 = ((c.x - sx) * (a.y - sy) - (c.y - sy) * (a.x - sx)) / area;
        double l2 = 1.0 - l0 - l1;
        if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;
        const double q0 = l0 / a.depth, q1 = l1 / b.depth, q2 = l2 / c.depth;
        const double inv = q0 + q1 + q2;
        const double depth = 1.0 / inv;
        Fragment& frag = frags[static_cast<std::size_t>(py) * static_cast<std::size_t>(w) + static_cast<std::size_t>(px)];
        if (depth < frag.depth) {
          frag.face = static_cast<int>(f);
          frag.depth = depth;
          frag.bary = {q0 / inv, q1 / inv, q2 / inv};
        }
      }
    }
  }

  ViewJacobian jac;
  jac.offsets.assign(frags.size() + 1, 0);
  std::vector<TexelTap> taps;
  const Vec3 to_light = -light.direction;
  for (std::size_t p = 0; p < frags.size(); ++p) {
    jac.offsets[p] = static_cast<std::uint32_t>(jac.taps.size());
    const Fragment& frag = frags[p];
    if (frag.face < 0) continue;
    const Face& face = mesh.faces()[static_cast<std::size_t>(frag.face)];
    Vec3 normal = Vec3::Zero();
    Vec3 point = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
      normal += frag.bary[static_cast<std::size_t>(k)] * mesh.normals()[static_cast<std::size_t>(face[static_cast<std::size_t>(k)])];
      point += frag.bary[static_cast<std::size_t>(k)] * mesh.vertices()[static_cast<std::size_t>(face[static_cast<std::size_t>(k)])];
    }
    const double len = normal.norm();
    normal = len > 0.0 ? Vec3(normal / len) : Vec3(-forward);
    if (normal.dot(eye - point) < 0.0) normal = -normal;  // two-sided lighting
    const double shade = light.ambient + light.diffuse * std::max(0.0, normal.dot(to_light));
    if (shade == 0.0) {
      // Covered but black: keep one zero-weight tap so the pixel stays covered.
      jac.taps.push_back({0, 0.0});
      continue;
    }
    if (scene.texture.kind() == TextureKind::uv) {
      const FaceUV& uv = mesh.uv()[static_cast<std::size_t>(frag.face)];
      const Vec2 t = frag.bary[0] * uv[0] + frag.bary[1] * uv[1] + frag.bary[2] * uv[2];
      bilinear_taps(scene.texture.resolution(), t.x(), t.y(), taps);
      for (const auto& tap : taps) jac.taps.push_back({tap.slot, shade * tap.weight});
    } else {
      for (int k = 0; k < 3; ++k) {
        const double wgt = shade * frag.bary[static_cast<std::size_t>(k)];
        if (wgt != 0.0) jac.taps.push_back({static_cast<std::uint32_t>(face[static_cast<std::size_t>(k)]), wgt});
      }
      if (jac.taps.size() == jac.offsets[p]) jac.taps.push_back({static_cast<std::uint32_t>(face[0]), 0.0});
    }
  }
  jac.offsets.back() = static_cast<std::uint32_t>(jac.taps.size());
  return jac;
}

core::Image evaluate_view(const ViewJacobian& jac, core::Shape size, const Texture& texture, const Rgb& background) {
  core::Image image(size);
  const std::size_t pixels = size.pixels();
  for (std::size_t p = 0; p < pixels; ++p) {
    if (!jac.covered(p)) {
      for (int ch = 0; ch < 3; ++ch) image[p * 3 + static_cast<std::size_t>(ch)] = background[static_cast<std::size_t>(ch)];
      continue;
    }
    double rgb[3] = {0.0, 0.0, 0.0};
    for (std::uint32_t k = jac.offsets[p]; k < jac.offsets[p + 1]; ++k) {
      const TexelTap& tap = jac.taps[k];
      for (int ch = 0; ch < 3; ++ch) rgb[ch] += tap.weight * texture.at(tap.slot, ch);
    }
    for (int ch = 0; ch < 3; ++ch) image[p * 3 + static_cast<std::size_t>(ch)] = rgb[ch];
  }
  return image;
}

}  // namespace

RenderedBatch render_batch(const Scene& scene) {
  validate(scene);
  RenderedBatch batch;
  batch.image_size = scene.image_size;
  batch.kind = scene.texture.kind();
  batch.texture_slots = scene.texture.slots();
  batch.background = scene.background;
  batch.jacobians.reserve(scene.cameras.size());
  batch.images.reserve(scene.cameras.size());
  for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
    batch.jacobians.push_back(rasterize_view(scene, scene.cameras[v], scene.lights[v]));
    batch.images.push_back(evaluate_view(batch.jacobians.back(), scene.image_size, scene.texture, scene.background));
  }
  return batch;
}

std::vector<core::Image> apply_jacobian(const RenderedBatch& batch, const Texture& texture) {
  if (texture.kind() != batch.kind || texture.slots() != batch.texture_slots) {
    throw DimensionError("texture layout differs from the rendered batch");
  }
  std::vector<core::Image> images;
  images.reserve(batch.jacobians.size());
  for (const auto& jac : batch.jacobians) images.push_back(evaluate_view(jac, batch.image_size, texture, batch.background));
  return images;
}

std::vector<double> texture_gradient(const RenderedBatch& batch, std::span<const core::PixelGrad> pixel_grads) {
  if (pixel_grads.size() != batch.jacobians.size()) {
    throw DimensionError(fmt::format("texture_gradient: {} pixel gradients for {} views", pixel_grads.size(),
                                     batch.jacobians.size()));
  }
  std::vector<double> grad(batch.texture_slots * 3, 0.0);
  for (std::size_t v = 0; v < pixel_grads.size(); ++v) {
    core::require_same_shape(pixel_grads[v].shape(), batch.image_size, "texture_gradient");
    const ViewJacobian& jac = batch.jacobians[v];
    const core::PixelGrad& g = pixel_grads[v];
    const std::size_t pixels = batch.image_size.pixels();
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::uint32_t k = jac.offsets[p]; k < jac.offsets[p + 1]; ++k) {
        const TexelTap& tap = jac.taps[k];
        for (int ch = 0; ch < 3; ++ch) {
          grad[static_cast<std::size_t>(tap.slot) * 3 + static_cast<std::size_t>(ch)] +=
              tap.weight * g[p * 3 + static_cast<std::size_t>(ch)];
        }
      }
    }
  }
  return grad;
}

}  // namespace assist::renderer
