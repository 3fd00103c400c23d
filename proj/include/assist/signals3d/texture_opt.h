#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "assist/classifiers/classifier.h"
#include "assist/core/numeric.h"
#include "assist/renderer/render.h"
#include "assist/renderer/scene.h"

namespace assist::signals3d {

using classifiers::Classifier;
using core::Image;
using renderer::Mesh;
using renderer::Scene;
using renderer::Texture;

/// Which label the signal works toward. Assistive signals target the true
/// class. Deceptive signals either pull toward a different `target_label`
/// (targeted) or push away from the true class (untargeted).
struct SignalMode {
  core::Direction direction = core::Direction::assistive;
  int true_label = 0;
  int target_label = 0;
  bool targeted = false;

  static SignalMode assistive(int true_label) { return {core::Direction::assistive, true_label, true_label, false}; }
  static SignalMode untargeted(int true_label) { return {core::Direction::deceptive, true_label, true_label, false}; }
  static SignalMode targeted_to(int true_label, int target) { return {core::Direction::deceptive, true_label, target, true}; }

  core::LossSpec loss_spec() const;
};

void validate(const SignalMode& mode, int num_classes);

/// Per-slot 0/1 mask over a texture plus the values written back where the
/// mask is 0.
struct TextureMask {
  std::vector<std::uint8_t> mask;
  std::vector<double> frozen;  // slots * 3 original values

  std::size_t active() const;
  static TextureMask all(const Texture& texture);
  TextureMask inverted() const;
};

/// Rectangle of texels; row 0 is the top row of the texture image.
struct PatchRegion {
  int row = 0;
  int col = 0;
  int height = 1;
  int width = 1;
};

void validate(const PatchRegion& region, int resolution);

TextureMask region_mask(const Texture& texture, const PatchRegion& region);

/// Slots that faces of the named groups can read: for UV textures every texel
/// with a bilinear tap inside one of the group's uv triangles, for vertex
/// textures the group's vertices. Unknown group names are a ConfigError.
TextureMask group_mask(const Mesh& mesh, const Texture& texture, const std::vector<std::string>& groups);

/// Every vertex color (0.5, 0.5, 0.5).
Texture init_texture_gray(const Mesh& mesh);

/// View sampling for expectation over transformation. Views are redrawn
/// every iteration unless `fixed_views` is set, in which case the first
/// draw is reused throughout.
struct EotConfig {
  renderer::SceneRanges ranges;
  int views_per_step = 15;
  bool fixed_views = false;
};

void validate(const EotConfig& eot);

struct TraceEntry {
  int iteration = 0;
  double loss = 0.0;
  double mean_confidence = 0.0;
};

struct TextureResult {
  Texture texture;
  std::vector<TraceEntry> trace;
};

/// Optimizes the texture bound in `scene` (its camera list is ignored). Each
/// iteration renders fresh views, averages the cross-entropy gradient over
/// them, pulls it back through the renderer and takes one clipped step. With
/// cfg.epsilon the texture stays within an L-infinity ball around its
/// starting values.
TextureResult optimize_full_texture(const Classifier& c, const Scene& scene, const SignalMode& mode,
                                    const core::OptimConfig& cfg, const EotConfig& eot);

/// As optimize_full_texture, with the gradient zeroed where the mask is 0 and
/// the frozen values rewritten there after every step.
TextureResult optimize_masked_texture(const Classifier& c, const Scene& scene, const TextureMask& mask,
                                      const SignalMode& mode, const core::OptimConfig& cfg, const EotConfig& eot);

struct PatchResult {
  Image patch;
  Texture texture;
  std::vector<TraceEntry> trace;
};

/// UV textures only. The region starts from seeded uniform noise and is then
/// optimized as a masked texture.
PatchResult optimize_patch_3d(const Classifier& c, const Scene& scene, const PatchRegion& region,
                              const SignalMode& mode, const core::OptimConfig& cfg, const EotConfig& eot);

/// The texture optimize_patch_3d starts from.
Texture initial_patch_texture(const Texture& texture, const PatchRegion& region, std::uint64_t seed);

Image extract_patch(const Texture& texture, const PatchRegion& region);
Texture insert_patch(const Texture& texture, const Image& patch, const PatchRegion& region);

/// Mean target confidence and loss over the given views, no update.
TraceEntry measure(const Classifier& c, const Scene& scene, const Texture& texture,
                   const std::vector<renderer::View>& views, const SignalMode& mode);

/// CSV with columns iteration, loss, mean_confidence.
std::string format_trace(const std::vector<TraceEntry>& trace);

/// PNG for UV textures, PLY (needs the mesh) for vertex textures.
void save_texture(const Texture& texture, const Mesh& mesh, const std::filesystem::path& path);

}  // namespace assist::signals3d
