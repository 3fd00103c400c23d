#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace assist::renderer {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;
using FaceUV = std::array<Vec2, 3>;

/// Triangle mesh with fixed geometry. UVs, when present, are stored per face
/// corner (OBJ semantics, seams allowed). Faces may carry a group id used to
/// build part masks ("windows", "tyres", ...).
class Mesh {
 public:
  /// Validates indices and face areas, then derives vertex normals.
  /// `face_groups` may be empty (every face in group 0).
  Mesh(std::vector<Vec3> vertices, std::vector<Face> faces, std::optional<std::vector<FaceUV>> uv = std::nullopt,
       std::vector<int> face_groups = {}, std::vector<std::string> group_names = {});

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Vec3>& normals() const { return normals_; }
  bool has_uv() const { return uv_.has_value(); }
  const std::vector<FaceUV>& uv() const;
  const std::vector<int>& face_groups() const { return face_groups_; }
  const std::vector<std::string>& group_names() const { return group_names_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t face_count() const { return faces_.size(); }

  /// Group ids whose names appear in `names`; unknown names are a
  /// ConfigError.
  std::vector<int> group_ids(const std::vector<std::string>& names) const;

  /// Largest vertex distance from the origin.
  double radius() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::optional<std::vector<FaceUV>> uv_;
  std::vector<int> face_groups_;
  std::vector<std::string> group_names_;
  std::vector<Vec3> normals_;
};

inline constexpr double kMinFaceArea = 1e-12;

}  // namespace assist::renderer
