#include "assist/renderer/primitives.h"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "assist/core/errors.h"

namespace assist::renderer {

namespace {

// Any unit vector orthogonal to `axis`.
Vec3 orthogonal(const Vec3& axis) {
  const Vec3 probe = std::abs(axis.x()) < 0.9 ? Vec3(1.0, 0.0, 0.0) : Vec3(0.0, 1.0, 0.0);
  return axis.cross(probe).normalized();
}

}  // namespace

MeshBuilder::MeshBuilder(int atlas_side, double inset) : atlas_side_(atlas_side), inset_(inset) {
  if (atlas_side < 1) throw ConfigError("atlas_side must be >= 1");
  if (!(inset >= 0.0 && 2.0 * inset < 1.0 / atlas_side)) throw ConfigError("atlas inset leaves an empty tile");
}

int MeshBuilder::group_id(const std::string& name) {
  auto [it, inserted] = group_lookup_.emplace(name, static_cast<int>(group_names_.size()));
  if (inserted) group_names_.push_back(name);
  return it->second;
}

std::array<double, 4> MeshBuilder::tile_rect(int tile) const {
  if (tile < 0 || tile >= atlas_side_ * atlas_side_) {
    throw IndexError(fmt::format("atlas tile {} outside a {}x{} atlas", tile, atlas_side_, atlas_side_));
  }
  const double size = 1.0 / atlas_side_;
  const int col = tile % atlas_side_, row = tile / atlas_side_;
  // Tile 0 sits in the top-left corner of the texture image (v = 1).
  const double u0 = col * size, v1 = 1.0 - row * size;
  return {u0 + inset_, u0 + size - inset_, v1 - size + inset_, v1 - inset_};
}

void MeshBuilder::add_surface(const SurfaceFn& fn, int nu, int nv, const std::string& group, int tile) {
  if (nu < 1 || nv < 1) throw ConfigError("surface needs at least one cell per direction");
  const auto rect = tile_rect(tile);
  const int gid = group_id(group);
  const int base = static_cast<int>(vertices_.size());
  std::vector<Vec2> grid_uv;
  for (int j = 0; j <= nv; ++j) {
    for (int i = 0; i <= nu; ++i) {
      const double s = static_cast<double>(i) / nu, t = static_cast<double>(j) / nv;
      vertices_.push_back(fn(s, t));
      grid_uv.emplace_back(rect[0] + s * (rect[1] - rect[0]), rect[2] + t * (rect[3] - rect[2]));
    }
  }
  auto at = [&](int i, int j) { return j * (nu + 1) + i; };
  auto emit = [&](int a, int b, int c) {
    const Vec3& pa = vertices_[static_cast<std::size_t>(base + a)];
    const Vec3& pb = vertices_[static_cast<std::size_t>(base + b)];
    const Vec3& pc = vertices_[static_cast<std::size_t>(base + c)];
    if (0.5 * (pb - pa).cross(pc - pa).norm() <= 1e-10) return;
    faces_.push_back({base + a, base + b, base + c});
    uv_.push_back({grid_uv[static_cast<std::size_t>(a)], grid_uv[static_cast<std::size_t>(b)],
                   grid_uv[static_cast<std::size_t>(c)]});
    groups_.push_back(gid);
  };
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nu; ++i) {
      emit(at(i, j), at(i + 1, j), at(i + 1, j + 1));
      emit(at(i, j), at(i + 1, j + 1), at(i, j + 1));
    }
  }
}

void MeshBuilder::add_quad(const Vec3& origin, const Vec3& edge_u, const Vec3& edge_v, int nu, int nv,
                           const std::string& group, int tile) {
  add_surface([&](double s, double t) -> Vec3 { return origin + s * edge_u + t * edge_v; }, nu, nv, group, tile);
}

void MeshBuilder::add_box(const Vec3& c, const Vec3& h, int n, const std::string& group,
                          const std::array<int, 6>& tiles) {
  add_box(c, h, n, {group, group, group, group, group, group}, tiles);
}

void MeshBuilder::add_box(const Vec3& c, const Vec3& h, int n, const std::array<std::string, 6>& groups,
                          const std::array<int, 6>& tiles) {
  const Vec3 ex(2 * h.x(), 0, 0), ey(0, 2 * h.y(), 0), ez(0, 0, 2 * h.z());
  const Vec3 lo = c - h;
  add_quad(lo + ez, -ez, ey, n, n, groups[0], tiles[0]);
  add_quad(lo + ex, ez, ey, n, n, groups[1], tiles[1]);
  add_quad(lo + ez, ex, -ez, n, n, groups[2], tiles[2]);
  add_quad(lo + ey, ex, ez, n, n, groups[3], tiles[3]);
  add_quad(lo + ex, -ex, ey, n, n, groups[4], tiles[4]);
  add_quad(lo + ez, ex, ey, n, n, groups[5], tiles[5]);
}

void MeshBuilder::add_cylinder(const Vec3& center, const Vec3& axis, double radius, double half_length, int segments,
                               const std::string& side_group, int side_tile, const std::string& cap_group,
                               int cap_tile) {
  const Vec3 a = axis.normalized();
  const Vec3 e1 = orthogonal(a), e2 = a.cross(e1);
  auto ring = [&](double t) {
    const double phi = 2.0 * std::numbers::pi * t;
    return Vec3(std::cos(phi) * e1 + std::sin(phi) * e2);
  };
  add_surface([&](double s, double t) -> Vec3 { return center + radius * ring(s) + (2.0 * t - 1.0) * half_length * a; },
              segments, 1, side_group, side_tile);
  if (cap_group.empty()) return;
  for (double end : {-1.0, 1.0}) {
    const Vec3 cc = center + end * half_length * a;
    add_surface(
        [&](double s, double t) -> Vec3 {
          const double tt = end > 0 ? t : 1.0 - t;
          return cc + s * radius * ring(tt);
        },
        1, segments, cap_group, cap_tile);
  }
}

void MeshBuilder::add_sphere(const Vec3& center, double radius, int segments, int rings, const std::string& group,
                             int tile) {
  add_surface(
      [&](double s, double t) -> Vec3 {
        const double phi = 2.0 * std::numbers::pi * s, theta = std::numbers::pi * (1.0 - t);
        return center + radius * Vec3(std::sin(theta) * std::cos(phi), std::cos(theta), -std::sin(theta) * std::sin(phi));
      },
      segments, rings, group, tile);
}

Mesh MeshBuilder::build() const { return Mesh(vertices_, faces_, uv_, groups_, group_names_); }

Mesh unit_quad() {
  MeshBuilder b(1, 0.0);
  b.add_quad(Vec3(-0.5, -0.5, 0.0), Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0), 1, 1, "surface", 0);
  return b.build();
}

Mesh uv_sphere(int segments, int rings) {
  MeshBuilder b(1, 0.0);
  b.add_sphere(Vec3::Zero(), 1.0, segments, rings, "surface", 0);
  return b.build();
}

}  // namespace assist::renderer
