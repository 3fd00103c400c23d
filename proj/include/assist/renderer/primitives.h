#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "assist/renderer/mesh.h"

namespace assist::renderer {

/// Procedural mesh assembly. Every surface gets its own vertices (flat seams)
/// and is mapped into one tile of a square UV atlas with `atlas_side` tiles
/// per side. Tiles are inset by `inset` (in uv units) so bilinear lookups
/// never read a neighbouring tile.
class MeshBuilder {
 public:
  using SurfaceFn = std::function<Vec3(double s, double t)>;

  explicit MeshBuilder(int atlas_side = 4, double inset = 1.0 / 64.0);

  /// Samples `fn` on an (nu + 1) x (nv + 1) grid over [0,1]^2 and triangulates
  /// it; (s, t) map linearly onto the tile. Degenerate triangles are dropped.
  void add_surface(const SurfaceFn& fn, int nu, int nv, const std::string& group, int tile);

  void add_quad(const Vec3& origin, const Vec3& edge_u, const Vec3& edge_v, int nu, int nv, const std::string& group,
                int tile);
  /// Axis-aligned box; `tiles` are for the -x, +x, -y, +y, -z, +z faces.
  void add_box(const Vec3& center, const Vec3& half, int n, const std::string& group, const std::array<int, 6>& tiles);
  void add_box(const Vec3& center, const Vec3& half, int n, const std::array<std::string, 6>& groups,
               const std::array<int, 6>& tiles);
  /// Cylinder around `axis` (unit); caps are skipped when `cap_group` is empty.
  void add_cylinder(const Vec3& center, const Vec3& axis, double radius, double half_length, int segments,
                    const std::string& side_group, int side_tile, const std::string& cap_group, int cap_tile);
  void add_sphere(const Vec3& center, double radius, int segments, int rings, const std::string& group, int tile);

  /// uv rectangle [u0,u1] x [v0,v1] of a tile after the inset.
  std::array<double, 4> tile_rect(int tile) const;

  Mesh build() const;

 private:
  int group_id(const std::string& name);

  int atlas_side_;
  double inset_;
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<FaceUV> uv_;
  std::vector<int> groups_;
  std::vector<std::string> group_names_;
  std::map<std::string, int> group_lookup_;
};

/// Unit quad in the z = 0 plane, facing +z, uv covering the whole texture.
Mesh unit_quad();

/// Sphere of radius 1 with `segments` x `rings` cells, single group "surface".
Mesh uv_sphere(int segments, int rings);

}  // namespace assist::renderer
