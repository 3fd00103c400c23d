#include "assist/signals3d/texture_opt.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "assist/core/errors.h"
#include "assist/core/io.h"
#include "assist/core/rng.h"
#include "assist/renderer/mesh_io.h"

namespace assist::signals3d {

using renderer::TextureKind;

core::LossSpec SignalMode::loss_spec() const {
  core::LossSpec spec;
  spec.direction = direction;
  spec.targeted = targeted;
  spec.target_label = targeted ? target_label : true_label;
  return spec;
}

void validate(const SignalMode& mode, int num_classes) {
  if (mode.true_label < 0 || mode.true_label >= num_classes) {
    throw IndexError(fmt::format("true label {} outside [0, {})", mode.true_label, num_classes));
  }
  if (mode.target_label < 0 || mode.target_label >= num_classes) {
    throw IndexError(fmt::format("target label {} outside [0, {})", mode.target_label, num_classes));
  }
  if (mode.direction == core::Direction::assistive) {
    if (mode.targeted || mode.target_label != mode.true_label) {
      throw PreconditionError("assistive signals must target the true class");
    }
  } else if (mode.targeted && mode.target_label == mode.true_label) {
    throw PreconditionError("a targeted deceptive signal needs a target other than the true class");
  }
}

std::size_t TextureMask::active() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

TextureMask TextureMask::all(const Texture& texture) {
  return {std::vector<std::uint8_t>(texture.slots(), 1), {texture.values().begin(), texture.values().end()}};
}

TextureMask TextureMask::inverted() const {
  TextureMask out = *this;
  for (auto& m : out.mask) m = m ? 0 : 1;
  return out;
}

void validate(const PatchRegion& r, int resolution) {
  if (r.height < 1 || r.width < 1 || r.row < 0 || r.col < 0 || r.row + r.height > resolution ||
      r.col + r.width > resolution) {
    throw BoundsError(fmt::format("patch region ({}, {}) size {}x{} does not fit a {}x{} texture", r.row, r.col,
                                  r.height, r.width, resolution, resolution));
  }
}

TextureMask region_mask(const Texture& texture, const PatchRegion& region) {
  if (texture.kind() != TextureKind::uv) throw PreconditionError("patch regions need a UV texture");
  validate(region, texture.resolution());
  TextureMask m{std::vector<std::uint8_t>(texture.slots(), 0), {texture.values().begin(), texture.values().end()}};
  for (int r = region.row; r < region.row + region.height; ++r) {
    for (int c = region.col; c < region.col + region.width; ++c) m.mask[texture.texel_slot(r, c)] = 1;
  }
  return m;
}

TextureMask group_mask(const Mesh& mesh, const Texture& texture, const std::vector<std::string>& groups) {
  texture.check_binding(mesh);
  const auto ids = mesh.group_ids(groups);
  TextureMask m{std::vector<std::uint8_t>(texture.slots(), 0), {texture.values().begin(), texture.values().end()}};
  std::vector<renderer::TexelTap> taps;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    if (std::find(ids.begin(), ids.end(), mesh.face_groups()[f]) == ids.end()) continue;
    const auto& face = mesh.faces()[f];
    if (texture.kind() == TextureKind::vertex) {
      for (int v : face) m.mask[static_cast<std::size_t>(v)] = 1;
      continue;
    }
    const auto& uv = mesh.uv()[f];
    const int res = texture.resolution();
    double edge = 0.0;
    for (int k = 0; k < 3; ++k) edge = std::max(edge, (uv[static_cast<std::size_t>(k)] - uv[static_cast<std::size_t>((k + 1) % 3)]).norm());
    // Half-texel sampling of the triangle covers every tap it can produce.
    const int n = static_cast<int>(std::ceil(2.0 * res * edge)) + 1;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; i + j <= n; ++j) {
        const double a = static_cast<double>(i) / n, b = static_cast<double>(j) / n;
        const renderer::Vec2 p = (1.0 - a - b) * uv[0] + a * uv[1] + b * uv[2];
        renderer::bilinear_taps(res, p.x(), p.y(), taps);
        for (const auto& t : taps) m.mask[t.slot] = 1;
      }
    }
  }
  return m;
}

Texture init_texture_gray(const Mesh& mesh) { return Texture::vertex(mesh.vertex_count(), {0.5, 0.5, 0.5}); }

void validate(const EotConfig& eot) {
  if (eot.views_per_step < 1) throw ConfigError("views_per_step must be >= 1");
  renderer::validate(eot.ranges);
}

namespace {

struct StepOutcome {
  TraceEntry entry;
  std::vector<double> grad;
};

StepOutcome evaluate_views(const Classifier& c, const Scene& scene, const Texture& texture,
                           const std::vector<renderer::View>& views, const SignalMode& mode, bool want_grad) {
  Scene s = renderer::with_views(scene, views);
  s.texture = texture;
  const auto batch = renderer::render_batch(s);
  const core::LossSpec spec = mode.loss_spec();
  const double inv = 1.0 / static_cast<double>(views.size());
  StepOutcome out;
  std::vector<core::PixelGrad> grads(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    const core::ProbVector probs = c.predict(batch.images[v]);
    out.entry.mean_confidence += probs[static_cast<std::size_t>(spec.target_label)] * inv;
    if (want_grad) {
      out.entry.loss += c.loss_gradient(batch.images[v], spec.target_label, grads[v]) * inv;
      for (double& g : grads[v].values()) g *= inv;
    } else {
      out.entry.loss += core::cross_entropy(probs, spec.target_label) * inv;
    }
  }
  if (want_grad) out.grad = renderer::texture_gradient(batch, grads);
  return out;
}

}  // namespace

TraceEntry measure(const Classifier& c, const Scene& scene, const Texture& texture,
                   const std::vector<renderer::View>& views, const SignalMode& mode) {
  if (views.empty()) throw DomainError("measure needs at least one view");
  return evaluate_views(c, scene, texture, views, mode, false).entry;
}

TextureResult optimize_masked_texture(const Classifier& c, const Scene& scene, const TextureMask& mask,
                                      const SignalMode& mode, const core::OptimConfig& cfg, const EotConfig& eot) {
  core::validate(cfg);
  validate(eot);
  validate(mode, c.num_classes());
  if (!scene.mesh) throw GeometryError("scene has no mesh");
  scene.texture.check_binding(*scene.mesh);
  const Texture& start = scene.texture;
  if (mask.mask.size() != start.slots() || mask.frozen.size() != start.values().size()) {
    throw DimensionError(fmt::format("mask covers {} slots, texture has {}", mask.mask.size(), start.slots()));
  }
  if (mask.active() == 0) throw PreconditionError("texture mask selects no slots");

  TextureResult result{start, {}};
  Texture& tex = result.texture;
  const std::vector<double> origin(start.values().begin(), start.values().end());
  const double dir = mode.loss_spec().ascent_sign();
  const core::Rng view_rng = core::Rng(cfg.seed).split("views");
  std::vector<renderer::View> views;
  for (int it = 0; it < cfg.iterations; ++it) {
    try {
      if (views.empty() || !eot.fixed_views) {
        core::Rng rng = view_rng.split(static_cast<std::uint64_t>(eot.fixed_views ? 0 : it));
        views = renderer::sample_scene_params(rng, eot.ranges, eot.views_per_step);
      }
      StepOutcome step = evaluate_views(c, scene, tex, views, mode, true);
      step.entry.iteration = it;
      result.trace.push_back(step.entry);
      auto values = tex.values();
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask.mask[i / 3]) continue;
        const double g = cfg.use_sign_gradient ? core::sign(step.grad[i]) : step.grad[i];
        values[i] = std::clamp(values[i] + dir * cfg.step_size * g, 0.0, 1.0);
      }
      if (cfg.epsilon) core::project_linf_inplace(values, origin, *cfg.epsilon);
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask.mask[i / 3]) values[i] = mask.frozen[i];
      }
    } catch (const Error&) {
      rethrow_with_context(fmt::format("iteration {}", it));
    }
  }
  return result;
}

TextureResult optimize_full_texture(const Classifier& c, const Scene& scene, const SignalMode& mode,
                                    const core::OptimConfig& cfg, const EotConfig& eot) {
  return optimize_masked_texture(c, scene, TextureMask::all(scene.texture), mode, cfg, eot);
}

Texture initial_patch_texture(const Texture& texture, const PatchRegion& region, std::uint64_t seed) {
  if (texture.kind() != TextureKind::uv) throw PreconditionError("3D patches need a UV texture");
  validate(region, texture.resolution());
  Texture out = texture;
  core::Rng rng = core::Rng(seed).split("patch-init");
  for (int r = region.row; r < region.row + region.height; ++r) {
    for (int col = region.col; col < region.col + region.width; ++col) {
      for (int ch = 0; ch < 3; ++ch) out.at(out.texel_slot(r, col), ch) = rng.uniform();
    }
  }
  return out;
}

PatchResult optimize_patch_3d(const Classifier& c, const Scene& scene, const PatchRegion& region,
                              const SignalMode& mode, const core::OptimConfig& cfg, const EotConfig& eot) {
  Scene start = scene;
  start.texture = initial_patch_texture(scene.texture, region, cfg.seed);
  const TextureMask mask = region_mask(start.texture, region);
  TextureResult r = optimize_masked_texture(c, start, mask, mode, cfg, eot);
  return {extract_patch(r.texture, region), std::move(r.texture), std::move(r.trace)};
}

Image extract_patch(const Texture& texture, const PatchRegion& region) {
  if (texture.kind() != TextureKind::uv) throw PreconditionError("patches need a UV texture");
  validate(region, texture.resolution());
  Image patch({region.height, region.width});
  for (int r = 0; r < region.height; ++r) {
    for (int col = 0; col < region.width; ++col) {
      for (int ch = 0; ch < 3; ++ch) patch.at(r, col, ch) = texture.at(texture.texel_slot(region.row + r, region.col + col), ch);
    }
  }
  return patch;
}

Texture insert_patch(const Texture& texture, const Image& patch, const PatchRegion& region) {
  if (texture.kind() != TextureKind::uv) throw PreconditionError("patches need a UV texture");
  validate(region, texture.resolution());
  core::require_same_shape(patch.shape(), {region.height, region.width}, "insert_patch");
  Texture out = texture;
  for (int r = 0; r < region.height; ++r) {
    for (int col = 0; col < region.width; ++col) {
      for (int ch = 0; ch < 3; ++ch) out.at(out.texel_slot(region.row + r, region.col + col), ch) = patch.at(r, col, ch);
    }
  }
  return out;
}

std::string format_trace(const std::vector<TraceEntry>& trace) {
  std::string out = "iteration,loss,mean_confidence\n";
  for (const auto& e : trace) out += fmt::format("{},{:.9f},{:.9f}\n", e.iteration, e.loss, e.mean_confidence);
  return out;
}

void save_texture(const Texture& texture, const Mesh& mesh, const std::filesystem::path& path) {
  if (texture.kind() == TextureKind::uv) {
    core::save_png(texture.to_image(), path);
  } else {
    renderer::save_ply(mesh, texture, path);
  }
}

}  // namespace assist::signals3d
