/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "core/normals.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <queue>
#include <tuple>

#include "core/error.hpp"
#include "core/knn.hpp"

namespace jloc::geom {

NormalEstimate estimate_normals(PointCloud& cloud, std::size_t k_normals) {
  const std::size_t n = cloud.points.size();
  require_arg(k_normals >= 3, "estimate_normals: k_normals must be >= 3");
  require_arg(n > k_normals, "estimate_normals: need more points than k_normals");

  KnnIndex index = KnnIndex::build(cloud.points);
  // Neighbourhood includes the point itself (it is its own nearest).
  const num::IndexMatrix nbrs = index.knn_points(cloud.points, k_normals, false);

  NormalEstimate report;
  cloud.normals.assign(n, Vec3{0, 0, 1});
  std::vector<char> degenerate(n, 0);

#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    Vec3 mean{0, 0, 0};
    for (std::size_t m = 0; m < k_normals; ++m) {
      mean += cloud.points[static_cast<std::size_t>(nbrs.at(i, m))];
    }
    mean = mean / static_cast<double>(k_normals);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t m = 0; m < k_normals; ++m) {
      const Vec3 d = cloud.points[static_cast<std::size_t>(nbrs.at(i, m))] - mean;
      const Eigen::Vector3d dv(d.x, d.y, d.z);
      cov += dv * dv.transpose();
    }
    if (cov.norm() < 1e-24) {
      degenerate[i] = 1;  // fallback +Z already in place
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Eigen::Vector3d ev = solver.eigenvectors().col(0);  // smallest eigenvalue
    Vec3 normal{ev.x(), ev.y(), ev.z()};
    const double len = norm(normal);
    if (!(len > 0.0) || !std::isfinite(len)) {
      degenerate[i] = 1;
      continue;
    }
    cloud.normals[i] = normal / len;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (degenerate[i]) report.degenerate_points.push_back(i);
  }

  // Symmetric kNN adjacency for the orientation MST.
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < k_normals; ++m) {
      const auto j = static_cast<std::uint32_t>(nbrs.at(i, m));
      if (j == i) continue;
      adj[i].push_back(j);
      adj[j].push_back(static_cast<std::uint32_t>(i));
    }
  }

  // Prim per connected component; flipping a child to agree with its parent.
  // Edge weight 1 - |n_i . n_j| prefers flat regions first.
  using Edge = std::tuple<double, std::uint32_t, std::uint32_t>;  // (w, to, from)
  std::vector<char> visited(n, 0);
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (visited[seed]) continue;
    std::priority_queue<Edge, std::vector<Edge>, std::greater<Edge>> queue;
    visited[seed] = 1;
    for (std::uint32_t j : adj[seed]) {
      queue.emplace(1.0 - std::fabs(dot(cloud.normals[seed], cloud.normals[j])), j,
                    static_cast<std::uint32_t>(seed));
    }
    while (!queue.empty()) {
      const auto [w, to, from] = queue.top();
      queue.pop();
      if (visited[to]) continue;
      visited[to] = 1;
      if (dot(cloud.normals[from], cloud.normals[to]) < 0.0) {
        cloud.normals[to] = -cloud.normals[to];
      }
      for (std::uint32_t j : adj[to]) {
        if (!visited[j]) {
          queue.emplace(1.0 - std::fabs(dot(cloud.normals[to], cloud.normals[j])), j, to);
        }
      }
    }
  }

  // Global flip: majority should point away from the centroid.
  Vec3 centroid{0, 0, 0};
  for (const Vec3& p : cloud.points) centroid += p;
  centroid = centroid / static_cast<double>(n);
  std::int64_t balance = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = dot(cloud.normals[i], cloud.points[i] - centroid);
    if (d > 0.0) ++balance;
    else if (d < 0.0) --balance;
  }
  if (balance < 0) {
    for (Vec3& nn : cloud.normals) nn = -nn;
  }
  return report;
}

}  // namespace jloc::geom
