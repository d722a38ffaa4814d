/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/tensor.hpp"
#include "core/vec3.hpp"

namespace jloc::geom {

// Exact k-nearest-neighbour index over row vectors. 3-D data is backed by a
// kd-tree; other dimensionalities (feature space) use a flat scan. Results
// are sorted by (squared distance, index) ascending, so ties resolve to the
// lower index.
class KnnIndex {
 public:
  KnnIndex(std::span<const double> data, std::size_t dim);
  static KnnIndex build(std::span<const Vec3> points);

  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }

  // exclude_self requires the queries to be the indexed rows themselves
  // (query row i skips candidate i).
  num::IndexMatrix knn(std::span<const double> queries, std::size_t k, bool exclude_self) const;
  num::IndexMatrix knn_points(std::span<const Vec3> queries, std::size_t k, bool exclude_self) const;

  // Single query; exclude = row to skip or SIZE_MAX. out must hold k entries.
  void query(const double* q, std::size_t k, std::size_t exclude, std::int32_t* out) const;

 private:
  struct Node {
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::uint32_t left = 0, right = 0;  // child node ids
    std::uint32_t begin = 0, end = 0;   // leaf range into order_
  };

  std::uint32_t build_node(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node_id, const double* q, std::size_t k, std::size_t exclude,
              std::vector<std::pair<double, std::int32_t>>& heap) const;

  std::vector<double> data_;
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
  bool use_tree_ = false;
};

}  // namespace jloc::geom
