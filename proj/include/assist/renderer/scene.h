#pragma once

#include <memory>
#include <vector>

#include "assist/core/image.h"
#include "assist/core/rng.h"
#include "assist/renderer/mesh.h"
#include "assist/renderer/texture.h"

namespace assist::renderer {

/// Orbit camera looking at the origin with +Y up.
struct Camera {
  double distance = 2.5;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double fov_y_deg = 40.0;

  Vec3 position() const;
  bool operator==(const Camera&) const = default;
};

/// Directional light; `direction` is the direction light travels.
struct Light {
  Vec3 direction = Vec3(0.0, 0.0, -1.0);
  double ambient = 0.4;
  double diffuse = 0.6;

  bool operator==(const Light&) const = default;
};

void validate(const Camera& camera);
void validate(const Light& light);

struct Scene {
  std::shared_ptr<const Mesh> mesh;
  Texture texture = Texture::vertex(1);
  std::vector<Camera> cameras;
  std::vector<Light> lights;  // lights[i] pairs with cameras[i]
  core::Shape image_size{32, 32};
  Rgb background{0.0, 0.0, 0.0};
};

void validate(const Scene& scene);

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Sampling box for EoT views. The light direction is drawn inside a cone
/// around the camera's viewing direction: polar angle in `light_cone_deg`,
/// roll about the view axis in `light_roll_deg`. k_d is capped so that
/// k_a + k_d <= 1.
struct SceneRanges {
  ParamRange azimuth_deg{0.0, 360.0};
  ParamRange elevation_deg{0.0, 40.0};
  ParamRange distance{2.0, 3.0};
  ParamRange fov_y_deg{40.0, 40.0};
  ParamRange light_cone_deg{0.0, 45.0};
  ParamRange light_roll_deg{0.0, 360.0};
  ParamRange ambient{0.3, 0.6};
  ParamRange diffuse{0.4, 0.7};
};

struct View {
  Camera camera;
  Light light;
  bool operator==(const View&) const = default;
};

void validate(const SceneRanges& ranges);

/// Independent uniform draws per parameter.
std::vector<View> sample_scene_params(core::Rng& rng, const SceneRanges& ranges, int count);

/// Light whose direction is the camera viewing direction tilted by
/// `cone_deg` and rolled by `roll_deg` about the view axis.
Light light_relative_to(const Camera& camera, double cone_deg, double roll_deg, double ambient, double diffuse);

/// Copies `base` with its camera/light lists replaced by `views`.
Scene with_views(const Scene& base, const std::vector<View>& views);

}  // namespace assist::renderer
