#include "assist/renderer/scene.h"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "assist/core/errors.h"

namespace assist::renderer {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

void check_range(const ParamRange& r, const char* name) {
  if (!(r.lo <= r.hi)) throw DomainError(fmt::format("range '{}' is empty ({} > {})", name, r.lo, r.hi));
}

double draw(core::Rng& rng, const ParamRange& r) { return r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi); }

// Orthonormal camera basis: forward points from the eye to the origin.
void camera_basis(const Camera& camera, Vec3& forward, Vec3& right, Vec3& up) {
  forward = (-camera.position()).normalized();
  Vec3 world_up(0.0, 1.0, 0.0);
  if (forward.cross(world_up).norm() < 1e-9) world_up = Vec3(0.0, 0.0, forward.y() > 0 ? 1.0 : -1.0);
  right = forward.cross(world_up).normalized();
  up = right.cross(forward);
}

}  // namespace

Vec3 Camera::position() const {
  const double az = radians(azimuth_deg), el = radians(elevation_deg);
  return distance * Vec3(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
}

void validate(const Camera& camera) {
  if (!(camera.distance > 0.0)) throw GeometryError("camera distance must be positive");
  if (!(camera.fov_y_deg > 0.0 && camera.fov_y_deg < 180.0)) throw GeometryError("camera fov must lie in (0, 180)");
}

void validate(const Light& light) {
  if (std::abs(light.direction.norm() - 1.0) > 1e-9) throw GeometryError("light direction must be unit length");
  if (!(light.ambient >= 0.0) || !(light.diffuse >= 0.0) || light.ambient + light.diffuse > 1.0 + 1e-12) {
    throw GeometryError("light needs k_a, k_d >= 0 with k_a + k_d <= 1");
  }
}

void validate(const Scene& scene) {
  if (!scene.mesh) throw GeometryError("scene has no mesh");
  if (scene.cameras.empty()) throw DomainError("scene has no cameras");
  if (scene.cameras.size() != scene.lights.size()) throw DomainError("scene needs exactly one light per camera");
  if (scene.image_size.height <= 0 || scene.image_size.width <= 0) throw DimensionError("image size must be positive");
  for (double b : scene.background) {
    if (!(b >= 0.0 && b <= 1.0)) throw DomainError("background color must lie in [0, 1]");
  }
  scene.texture.check_binding(*scene.mesh);
  for (const auto& c : scene.cameras) validate(c);
  for (const auto& l : scene.lights) validate(l);
}

void validate(const SceneRanges& r) {
  check_range(r.azimuth_deg, "azimuth");
  check_range(r.elevation_deg, "elevation");
  check_range(r.distance, "distance");
  check_range(r.fov_y_deg, "fov_y");
  check_range(r.light_cone_deg, "light_cone");
  check_range(r.light_roll_deg, "light_roll");
  check_range(r.ambient, "ambient");
  check_range(r.diffuse, "diffuse");
  if (!(r.distance.lo > 0.0)) throw DomainError("distance range must be positive");
  if (!(r.ambient.lo >= 0.0 && r.diffuse.lo >= 0.0 && r.ambient.hi <= 1.0)) {
    throw DomainError("ambient/diffuse ranges must be non-negative with ambient <= 1");
  }
}

Light light_relative_to(const Camera& camera, double cone_deg, double roll_deg, double ambient, double diffuse) {
  Vec3 forward, right, up;
  camera_basis(camera, forward, right, up);
  const double theta = radians(cone_deg), phi = radians(roll_deg);
  Light light;
  light.direction =
      (std::cos(theta) * forward + std::sin(theta) * (std::cos(phi) * right + std::sin(phi) * up)).normalized();
  light.ambient = ambient;
  light.diffuse = std::min(diffuse, 1.0 - ambient);
  return light;
}

std::vector<View> sample_scene_params(core::Rng& rng, const SceneRanges& ranges, int count) {
  if (count < 1) throw DomainError("sample_scene_params: count must be >= 1");
  validate(ranges);
  std::vector<View> views;
  views.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    View v;
    v.camera.azimuth_deg = draw(rng, ranges.azimuth_deg);
    v.camera.elevation_deg = draw(rng, ranges.elevation_deg);
    v.camera.distance = draw(rng, ranges.distance);
    v.camera.fov_y_deg = draw(rng, ranges.fov_y_deg);
    const double cone = draw(rng, ranges.light_cone_deg);
    const double roll = draw(rng, ranges.light_roll_deg);
    const double ka = draw(rng, ranges.ambient);
    const double kd = draw(rng, ranges.diffuse);
    v.light = light_relative_to(v.camera, cone, roll, ka, kd);
    views.push_back(v);
  }
  return views;
}

Scene with_views(const Scene& base, const std::vector<View>& views) {
  Scene s = base;
  s.cameras.clear();
  s.lights.clear();
  for (const auto& v : views) {
    s.cameras.push_back(v.camera);
    s.lights.push_back(v.light);
  }
  return s;
}

}  // namespace assist::renderer
