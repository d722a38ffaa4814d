/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace jloc::num {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);
bool all_finite(std::span<const double> v);

// Row index matrix (e.g. k-nearest-neighbour lists): rows queries, cols
// neighbour slots.
struct IndexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> idx;

  std::int32_t at(std::size_t r, std::size_t c) const { return idx[r * cols + c]; }
};

namespace detail {
struct TensorNode {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  bool tape_output = false;
};
}  // namespace detail

// Dense row-major f64 tensor. Values are immutable once the tensor entered a
// tape; gradients accumulate on the shared node.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->values.size(); }
  std::size_t extent(std::size_t i) const { return node_->shape[i]; }
  // Leading rows / trailing columns of the flattened 2-D view.
  std::size_t cols() const { return node_->shape.empty() ? 1 : node_->shape.back(); }
  std::size_t rows() const { return node_->shape.empty() ? 1 : numel() / cols(); }

  std::span<const double> values() const { return node_->values; }
  // Direct mutation is only legal before the tensor participates in a tape.
  std::span<double> values_mut() { return node_->values; }

  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }

  bool has_grad() const { return !node_->grad.empty(); }
  // Gradient buffer, zero-filled and allocated on demand.
  std::span<const double> grad() const;
  std::vector<double> grad_or_zeros() const;
  void zero_grad();
  void accumulate_grad(std::span<const double> delta);

  std::shared_ptr<detail::TensorNode> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::TensorNode> node_;

  friend class Tape;
  friend Tensor wrap_node(std::shared_ptr<detail::TensorNode> node);
};

Tensor wrap_node(std::shared_ptr<detail::TensorNode> node);

}  // namespace jloc::num
