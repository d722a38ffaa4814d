/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "core/mesh.hpp"

#include <cmath>
#include <unordered_map>

#include "core/error.hpp"

namespace jloc::geom {

void TriMesh::validate() const {
  require_data(!vertices.empty(), "TriMesh: no vertices");
  require_data(!faces.empty(), "TriMesh: no faces");
  const std::uint32_t n = static_cast<std::uint32_t>(vertices.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    for (int c = 0; c < 3; ++c) {
      require_data(face[c] < n, "TriMesh: face " + std::to_string(f) + " index out of range");
    }
    require_data(face[0] != face[1] && face[1] != face[2] && face[0] != face[2],
                 "TriMesh: degenerate face " + std::to_string(f));
  }
}

Aabb TriMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices) box.expand(v);
  return box;
}

UpAxis parse_up_axis(const std::string& s) {
  if (s == "x" || s == "X") return UpAxis::X;
  if (s == "y" || s == "Y") return UpAxis::Y;
  if (s == "z" || s == "Z") return UpAxis::Z;
  raise(ErrorKind::Data, "unknown up_axis '" + s + "' (expected x, y or z)");
}

std::string up_axis_name(UpAxis axis) {
  switch (axis) {
    case UpAxis::X: return "x";
    case UpAxis::Y: return "y";
    default: return "z";
  }
}

void PointCloud::validate() const {
  require_data(!points.empty(), "PointCloud: no points");
  if (!normals.empty()) {
    require_data(normals.size() == points.size(), "PointCloud: normal count mismatch");
    for (std::size_t i = 0; i < normals.size(); ++i) {
      require_data(std::fabs(norm(normals[i]) - 1.0) <= 1e-6,
                   "PointCloud: normal " + std::to_string(i) + " not unit length");
    }
  }
}

Aabb PointCloud::bounds() const {
  Aabb box;
  for (const Vec3& p : points) box.expand(p);
  return box;
}

NormalizeRecord normalize_to_unit_cube(std::vector<Vec3>& points, std::vector<Vec3>& joints,
                                       UpAxis up_axis) {
  require_arg(!points.empty(), "normalize_to_unit_cube: empty geometry");
  Aabb box;
  for (const Vec3& p : points) box.expand(p);
  const double height = box.extent()[static_cast<int>(up_axis)];
  require(height > 0.0, ErrorKind::Numeric, "normalize_to_unit_cube: zero height along up axis");

  NormalizeRecord rec;
  rec.height = height;
  rec.scale = 1.0 / height;
  rec.up_axis = up_axis;

  Aabb scaled;
  for (Vec3& p : points) {
    p *= rec.scale;
    scaled.expand(p);
  }
  rec.translation = -scaled.center();
  for (Vec3& p : points) p += rec.translation;
  for (Vec3& j : joints) j = j * rec.scale + rec.translation;
  return rec;
}

namespace {
struct Vec3Key {
  double x, y, z;
  bool operator==(const Vec3Key& o) const { return x == o.x && y == o.y && z == o.z; }
};
struct Vec3KeyHash {
  std::size_t operator()(const Vec3Key& k) const {
    auto h = std::hash<double>{};
    std::size_t r = h(k.x);
    r ^= h(k.y) + 0x9e3779b97f4a7c15ull + (r << 6) + (r >> 2);
    r ^= h(k.z) + 0x9e3779b97f4a7c15ull + (r << 6) + (r >> 2);
    return r;
  }
};
}  // namespace

PointCloud mesh_to_pointcloud(const TriMesh& mesh) {
  mesh.validate();
  PointCloud cloud;
  cloud.points.reserve(mesh.vertices.size());
  std::unordered_map<Vec3Key, std::uint32_t, Vec3KeyHash> seen;
  seen.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) {
    const Vec3Key key{v.x, v.y, v.z};
    if (seen.emplace(key, static_cast<std::uint32_t>(cloud.points.size())).second) {
      cloud.points.push_back(v);
    }
  }
  return cloud;
}

}  // namespace jloc::geom
