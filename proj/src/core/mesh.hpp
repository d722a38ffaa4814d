/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/vec3.hpp"

namespace jloc::geom {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;

  // Face indices in range, no degenerate faces (three distinct indices).
  void validate() const;
  Aabb bounds() const;
};

enum class UpAxis { X = 0, Y = 1, Z = 2 };
UpAxis parse_up_axis(const std::string& s);
std::string up_axis_name(UpAxis axis);

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // empty or same size as points, unit length

  bool has_normals() const { return !normals.empty(); }
  void validate() const;
  Aabb bounds() const;
};

// Uniform scale followed by translation, with enough data to undo it.
struct NormalizeRecord {
  double height = 1.0;      // pre-normalization extent along up_axis
  double scale = 1.0;       // applied scale = 1/height
  Vec3 translation{0, 0, 0};  // applied after scaling
  UpAxis up_axis = UpAxis::Y;

  Vec3 apply(const Vec3& p) const { return p * scale + translation; }
  Vec3 invert(const Vec3& p) const { return (p - translation) / scale; }
};

// Scales geometry so the bounding-box extent along up_axis becomes 1, then
// translates the bounding-box center to the origin. Joints receive the same
// transform.
NormalizeRecord normalize_to_unit_cube(std::vector<Vec3>& points, std::vector<Vec3>& joints,
                                       UpAxis up_axis);

// Mesh vertices, deduplicated exactly, first occurrence order.
PointCloud mesh_to_pointcloud(const TriMesh& mesh);

}  // namespace jloc::geom
