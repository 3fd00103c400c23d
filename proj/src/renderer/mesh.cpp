#include "assist/renderer/mesh.h"

#include <algorithm>

#include <fmt/format.h>

#include "assist/core/errors.h"

namespace assist::renderer {

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Face> faces, std::optional<std::vector<FaceUV>> uv,
           std::vector<int> face_groups, std::vector<std::string> group_names)
    : vertices_(std::move(vertices)),
      faces_(std::move(faces)),
      uv_(std::move(uv)),
      face_groups_(std::move(face_groups)),
      group_names_(std::move(group_names)) {
  if (vertices_.empty() || faces_.empty()) throw GeometryError("mesh needs vertices and faces");
  const auto n = static_cast<int>(vertices_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    for (int idx : faces_[f]) {
      if (idx < 0 || idx >= n) throw GeometryError(fmt::format("face {} references vertex {} of {}", f, idx, n));
    }
    const Vec3& a = vertices_[static_cast<std::size_t>(faces_[f][0])];
    const Vec3& b = vertices_[static_cast<std::size_t>(faces_[f][1])];
    const Vec3& c = vertices_[static_cast<std::size_t>(faces_[f][2])];
    if (0.5 * (b - a).cross(c - a).norm() <= kMinFaceArea) throw GeometryError(fmt::format("face {} is degenerate", f));
  }
  if (uv_) {
    if (uv_->size() != faces_.size()) throw GeometryError("uv list must have one entry per face");
    for (std::size_t f = 0; f < uv_->size(); ++f) {
      for (const Vec2& t : (*uv_)[f]) {
        if (!(t.x() >= 0.0 && t.x() <= 1.0 && t.y() >= 0.0 && t.y() <= 1.0)) {
          throw GeometryError(fmt::format("face {} has uv outside [0,1]", f));
        }
      }
    }
  }
  if (face_groups_.empty()) face_groups_.assign(faces_.size(), 0);
  if (face_groups_.size() != faces_.size()) throw GeometryError("face_groups must have one entry per face");
  if (group_names_.empty()) group_names_.push_back("default");
  for (int g : face_groups_) {
    if (g < 0 || static_cast<std::size_t>(g) >= group_names_.size()) throw GeometryError("face group id out of range");
  }

  // Area-weighted face normals (cross product length = 2 * area).
  normals_.assign(vertices_.size(), Vec3::Zero());
  for (const Face& face : faces_) {
    const Vec3& a = vertices_[static_cast<std::size_t>(face[0])];
    const Vec3& b = vertices_[static_cast<std::size_t>(face[1])];
    const Vec3& c = vertices_[static_cast<std::size_t>(face[2])];
    const Vec3 weighted = (b - a).cross(c - a);
    for (int idx : face) normals_[static_cast<std::size_t>(idx)] += weighted;
  }
  for (Vec3& nrm : normals_) {
    const double len = nrm.norm();
    nrm = len > 0.0 ? Vec3(nrm / len) : Vec3(0.0, 1.0, 0.0);  // unreferenced vertex
  }
}

const std::vector<FaceUV>& Mesh::uv() const {
  if (!uv_) throw FormatError("mesh has no uv coordinates");
  return *uv_;
}

std::vector<int> Mesh::group_ids(const std::vector<std::string>& names) const {
  std::vector<int> ids;
  for (const auto& name : names) {
    const auto it = std::find(group_names_.begin(), group_names_.end(), name);
    if (it == group_names_.end()) throw ConfigError(fmt::format("mesh has no group named '{}'", name));
    ids.push_back(static_cast<int>(it - group_names_.begin()));
  }
  return ids;
}

double Mesh::radius() const {
  double r = 0.0;
  for (const Vec3& v : vertices_) r = std::max(r, v.norm());
  return r;
}

}  // namespace assist::renderer
