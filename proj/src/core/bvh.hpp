/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "core/mesh.hpp"
#include "core/vec3.hpp"

namespace jloc::geom {

struct Ray {
  Vec3 origin;
  Vec3 dir;  // unit length
};

struct RayHit {
  double t = 0.0;
  std::uint32_t triangle = 0;
  Vec3 point;
};

// Binary AABB tree over mesh triangles, median split on the longest centroid
// axis. Immutable after construction and safe to share across threads.
class Bvh {
 public:
  explicit Bvh(const TriMesh& mesh);

  std::size_t triangle_count() const { return tri_count_; }
  double scene_diagonal() const { return diagonal_; }
  const Aabb& bounds() const { return nodes_[root_].box; }
  // Minimum t accepted by intersection tests (filters origin-touching hits).
  double t_epsilon() const { return t_eps_; }

  // All intersections sorted by ascending t. Hits on a shared edge or vertex
  // are reported once, attributed to the lowest triangle index.
  std::vector<RayHit> raycast_all(const Ray& ray) const;
  std::optional<RayHit> raycast_first(const Ray& ray) const;

  // Crossing-number (parity) point-in-mesh test for watertight meshes.
  bool point_inside(const Vec3& p) const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t left = 0, right = 0;
    std::uint32_t begin = 0, end = 0;
    bool leaf = false;
  };

  std::uint32_t build_node(std::uint32_t begin, std::uint32_t end);
  bool intersect_triangle(std::uint32_t tri, const Ray& ray, double& t, Vec3& point) const;

  std::vector<Vec3> tri_a_, edge1_, edge2_;  // per-triangle v0, v1-v0, v2-v0
  std::vector<Aabb> tri_box_;
  std::vector<Vec3> centroid_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
  std::size_t tri_count_ = 0;
  double diagonal_ = 0.0;
  double t_eps_ = 1e-9;
};

}  // namespace jloc::geom
