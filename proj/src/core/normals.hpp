/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <vector>

#include "core/mesh.hpp"

namespace jloc::geom {

struct NormalEstimate {
  // Indices of points whose neighbourhood was degenerate; their normal fell
  // back to +Z before orientation.
  std::vector<std::size_t> degenerate_points;
};

// Per-point PCA normals over k-neighbourhoods (covariance eigenvector of the
// smallest eigenvalue), made consistent by propagation over a minimum
// spanning tree of the kNN graph, then globally flipped so the majority
// points away from the centroid. Fills cloud.normals in place.
NormalEstimate estimate_normals(PointCloud& cloud, std::size_t k_normals);

}  // namespace jloc::geom
