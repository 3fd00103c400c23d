#pragma once

#include <filesystem>
#include <optional>

#include "assist/renderer/mesh.h"
#include "assist/renderer/texture.h"

namespace assist::renderer {

struct LoadedObj {
  Mesh mesh;
  /// map_Kd of the first material that declares one, resolved against the
  /// MTL file's directory.
  std::optional<std::filesystem::path> diffuse_map;
};

/// Wavefront OBJ: v / vt / f records (f as v, v/vt, v/vt/vn or v//vn, with
/// negative indices allowed; polygons are fan-triangulated). `g`, `o` and
/// `usemtl` start face groups. Either every face has vt indices or none does.
LoadedObj load_obj(const std::filesystem::path& path);
void save_obj(const Mesh& mesh, const std::filesystem::path& path);

struct LoadedPly {
  Mesh mesh;
  std::optional<Texture> colors;
};

/// PLY (ascii or binary_little_endian) with vertex x/y/z, optional
/// red/green/blue (uchar 0..255 or float 0..1) and face vertex_indices lists.
LoadedPly load_ply(const std::filesystem::path& path);
/// ASCII PLY with per-vertex uchar RGB.
void save_ply(const Mesh& mesh, const Texture& colors, const std::filesystem::path& path);

}  // namespace assist::renderer
