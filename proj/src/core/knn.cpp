/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "core/knn.hpp"

#include <algorithm>
#include <numeric>

namespace jloc::geom {

namespace {

constexpr std::uint32_t kLeafSize = 16;

// Max-heap ordering on (squared distance, index): the heap top is the current
// worst candidate.
struct WorseFirst {
  bool operator()(const std::pair<double, std::int32_t>& a,
                  const std::pair<double, std::int32_t>& b) const {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  }
};

inline double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

inline void consider(std::vector<std::pair<double, std::int32_t>>& heap, std::size_t k, double d2,
                     std::int32_t idx) {
  const std::pair<double, std::int32_t> cand{d2, idx};
  if (heap.size() < k) {
    heap.push_back(cand);
    std::push_heap(heap.begin(), heap.end(), WorseFirst{});
  } else if (WorseFirst{}(cand, heap.front())) {
    std::pop_heap(heap.begin(), heap.end(), WorseFirst{});
    heap.back() = cand;
    std::push_heap(heap.begin(), heap.end(), WorseFirst{});
  }
}

}  // namespace

KnnIndex::KnnIndex(std::span<const double> data, std::size_t dim) : dim_(dim) {
  require_arg(dim >= 1, "KnnIndex: dimension must be >= 1");
  require_arg(data.size() % dim == 0, "KnnIndex: data size not a multiple of dim");
  data_.assign(data.begin(), data.end());
  count_ = data_.size() / dim;
  require_arg(count_ >= 1, "KnnIndex: empty dataset");
  use_tree_ = (dim_ == 3);
  if (use_tree_) {
    order_.resize(count_);
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * count_ / kLeafSize + 2);
    root_ = build_node(0, static_cast<std::uint32_t>(count_));
  }
}

KnnIndex KnnIndex::build(std::span<const Vec3> points) {
  static_assert(sizeof(Vec3) == 3 * sizeof(double));
  return KnnIndex(std::span<const double>(&points[0].x, points.size() * 3), 3);
}

std::uint32_t KnnIndex::build_node(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    nodes_.push_back(node);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }
  // Widest axis of the subrange.
  Aabb box;
  for (std::uint32_t i = begin; i < end; ++i) {
    const double* p = data_.data() + order_[i] * 3;
    box.expand({p[0], p[1], p[2]});
  }
  const Vec3 ext = box.extent();
  int axis = 0;
  if (ext.y > ext[axis]) axis = 1;
  if (ext.z > ext[axis]) axis = 2;

  const std::uint32_t mid = begin + (end - begin) / 2;
  const double* base = data_.data();
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [base, axis](std::uint32_t a, std::uint32_t b) {
                     const double ca = base[a * 3 + axis], cb = base[b * 3 + axis];
                     if (ca != cb) return ca < cb;
                     return a < b;
                   });
  node.axis = axis;
  node.split = base[order_[mid] * 3 + axis];
  nodes_.push_back(node);
  const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size() - 1);
  const std::uint32_t left = build_node(begin, mid);
  const std::uint32_t right = build_node(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KnnIndex::search(std::uint32_t node_id, const double* q, std::size_t k, std::size_t exclude,
                      std::vector<std::pair<double, std::int32_t>>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      if (idx == exclude) continue;
      consider(heap, k, sq_dist(q, data_.data() + idx * 3, 3), static_cast<std::int32_t>(idx));
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::uint32_t near = diff < 0.0 ? node.left : node.right;
  const std::uint32_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, k, exclude, heap);
  // Equal plane distance can still hide a lower-index tie, so <= here.
  if (heap.size() < k || diff * diff <= heap.front().first) {
    search(far, q, k, exclude, heap);
  }
}

void KnnIndex::query(const double* q, std::size_t k, std::size_t exclude,
                     std::int32_t* out) const {
  std::vector<std::pair<double, std::int32_t>> heap;
  heap.reserve(k + 1);
  if (use_tree_) {
    search(root_, q, k, exclude, heap);
  } else {
    for (std::size_t i = 0; i < count_; ++i) {
      if (i == exclude) continue;
      consider(heap, k, sq_dist(q, data_.data() + i * dim_, dim_), static_cast<std::int32_t>(i));
    }
  }
  require_dim(heap.size() == k, "KnnIndex: fewer candidates than k");
  std::sort(heap.begin(), heap.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; i < k; ++i) out[i] = heap[i].second;
}

num::IndexMatrix KnnIndex::knn(std::span<const double> queries, std::size_t k,
                               bool exclude_self) const {
  require_arg(k >= 1, "knn: k must be >= 1");
  require_arg(queries.size() % dim_ == 0, "knn: query size not a multiple of dim");
  const std::size_t m = queries.size() / dim_;
  const std::size_t available = count_ - (exclude_self ? 1 : 0);
  require_arg(k <= available, "knn: k=" + std::to_string(k) + " exceeds available candidates (" +
                                  std::to_string(available) + ")");
  if (exclude_self) {
    require_arg(m == count_, "knn: exclude_self requires queries == indexed rows");
  }
  num::IndexMatrix result;
  result.rows = m;
  result.cols = k;
  result.idx.resize(m * k);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    const std::size_t exclude = exclude_self ? static_cast<std::size_t>(i) : SIZE_MAX;
    query(queries.data() + static_cast<std::size_t>(i) * dim_, k, exclude,
          result.idx.data() + static_cast<std::size_t>(i) * k);
  }
  return result;
}

num::IndexMatrix KnnIndex::knn_points(std::span<const Vec3> queries, std::size_t k,
                                      bool exclude_self) const {
  require_arg(dim_ == 3, "knn_points: index is not 3-D");
  return knn(std::span<const double>(&queries[0].x, queries.size() * 3), k, exclude_self);
}

}  // namespace jloc::geom
