/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "core/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/error.hpp"

namespace jloc::geom {

namespace {

constexpr std::uint32_t kLeafTris = 4;
constexpr double kDetEpsilon = 1e-14;

bool slab_hit(const Aabb& box, const Ray& ray, double t_min, double t_max) {
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a];
    const double d = ray.dir[a];
    if (d == 0.0) {
      if (o < box.lo[a] || o > box.hi[a]) return false;
      continue;
    }
    const double inv = 1.0 / d;
    double t1 = (box.lo[a] - o) * inv;
    double t2 = (box.hi[a] - o) * inv;
    if (t1 > t2) std::swap(t1, t2);
    t_min = std::max(t_min, t1);
    t_max = std::min(t_max, t2);
    if (t_min > t_max) return false;
  }
  return true;
}

}  // namespace

Bvh::Bvh(const TriMesh& mesh) {
  mesh.validate();
  tri_count_ = mesh.faces.size();
  tri_a_.resize(tri_count_);
  edge1_.resize(tri_count_);
  edge2_.resize(tri_count_);
  tri_box_.resize(tri_count_);
  centroid_.resize(tri_count_);
  Aabb scene;
  for (std::size_t i = 0; i < tri_count_; ++i) {
    const Vec3& a = mesh.vertices[mesh.faces[i][0]];
    const Vec3& b = mesh.vertices[mesh.faces[i][1]];
    const Vec3& c = mesh.vertices[mesh.faces[i][2]];
    tri_a_[i] = a;
    edge1_[i] = b - a;
    edge2_[i] = c - a;
    Aabb box;
    box.expand(a);
    box.expand(b);
    box.expand(c);
    tri_box_[i] = box;
    centroid_[i] = (a + b + c) / 3.0;
    scene.expand(box);
  }
  diagonal_ = scene.diagonal();
  t_eps_ = 1e-9 * std::max(diagonal_, 1e-9);

  order_.resize(tri_count_);
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * tri_count_ / kLeafTris + 2);
  root_ = build_node(0, static_cast<std::uint32_t>(tri_count_));
}

std::uint32_t Bvh::build_node(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  for (std::uint32_t i = begin; i < end; ++i) node.box.expand(tri_box_[order_[i]]);

  if (end - begin <= kLeafTris) {
    node.leaf = true;
    nodes_.push_back(node);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  Aabb cbox;
  for (std::uint32_t i = begin; i < end; ++i) cbox.expand(centroid_[order_[i]]);
  const Vec3 ext = cbox.extent();
  int axis = 0;
  if (ext.y > ext[axis]) axis = 1;
  if (ext.z > ext[axis]) axis = 2;

  const std::uint32_t mid = begin + (end - begin) / 2;
  const auto* cen = centroid_.data();
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [cen, axis](std::uint32_t a, std::uint32_t b) {
                     const double ca = cen[a][axis], cb = cen[b][axis];
                     if (ca != cb) return ca < cb;
                     return a < b;
                   });

  nodes_.push_back(node);
  const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size() - 1);
  const std::uint32_t left = build_node(begin, mid);
  const std::uint32_t right = build_node(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

bool Bvh::intersect_triangle(std::uint32_t tri, const Ray& ray, double& t, Vec3& point) const {
  // Moller-Trumbore with inclusive barycentric bounds: hits exactly on a
  // shared edge are reported by both triangles and deduplicated later.
  const Vec3& e1 = edge1_[tri];
  const Vec3& e2 = edge2_[tri];
  const Vec3 p = cross(ray.dir, e2);
  const double det = dot(e1, p);
  if (std::fabs(det) < kDetEpsilon) return false;
  const double inv = 1.0 / det;
  const Vec3 s = ray.origin - tri_a_[tri];
  const double u = dot(s, p) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = cross(s, e1);
  const double v = dot(ray.dir, q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double tt = dot(e2, q) * inv;
  if (tt <= t_eps_) return false;
  t = tt;
  point = ray.origin + ray.dir * tt;
  return true;
}

std::vector<RayHit> Bvh::raycast_all(const Ray& ray) const {
  std::vector<RayHit> hits;
  std::vector<std::uint32_t> stack;
  stack.push_back(root_);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!slab_hit(node.box, ray, t_eps_, std::numeric_limits<double>::infinity())) continue;
    if (node.leaf) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t tri = order_[i];
        double t;
        Vec3 point;
        if (intersect_triangle(tri, ray, t, point)) hits.push_back({t, tri, point});
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(hits.begin(), hits.end(), [](const RayHit& a, const RayHit& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.triangle < b.triangle;
  });
  // Collapse duplicate reports of one geometric intersection (shared edges
  // and vertices); the lowest triangle index survives.
  const double tol = t_eps_;
  std::vector<RayHit> unique;
  unique.reserve(hits.size());
  for (const RayHit& h : hits) {
    if (!unique.empty()) {
      const RayHit& prev = unique.back();
      const Vec3 d = h.point - prev.point;
      if (std::fabs(h.t - prev.t) <= tol && std::fabs(d.x) <= tol && std::fabs(d.y) <= tol &&
          std::fabs(d.z) <= tol) {
        continue;
      }
    }
    unique.push_back(h);
  }
  return unique;
}

std::optional<RayHit> Bvh::raycast_first(const Ray& ray) const {
  auto hits = raycast_all(ray);
  if (hits.empty()) return std::nullopt;
  return hits.front();
}

bool Bvh::point_inside(const Vec3& p) const {
  // Fixed irrational-ish direction: avoids axis-aligned geometry grazing.
  static const Vec3 dir = normalized(Vec3{0.5773502691896258, 0.5773502691896257, 0.5773502691896259});
  const auto hits = raycast_all({p, dir});
  return hits.size() % 2 == 1;
}

}  // namespace jloc::geom
