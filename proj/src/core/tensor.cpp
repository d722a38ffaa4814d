/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jloc::num {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::size_t e : shape) {
    require_dim(e > 0, "Tensor: zero extent in shape " + shape_str(shape));
  }
  require_dim(shape_numel(shape) == values.size(),
              "Tensor: shape " + shape_str(shape) + " does not match " +
                  std::to_string(values.size()) + " values");
  require_numeric(all_finite(values), "Tensor: non-finite value at creation");
  node_ = std::make_shared<detail::TensorNode>();
  node_->shape = std::move(shape);
  node_->values = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> v(shape_numel(shape), 0.0);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> v(shape_numel(shape), value);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{1}, {value}); }

double Tensor::item() const {
  require_dim(numel() == 1, "Tensor::item: tensor has " + std::to_string(numel()) + " elements");
  return node_->values[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  require_dim(index.size() == rank(), "Tensor::at: index rank mismatch");
  std::size_t flat = 0;
  std::size_t i = 0;
  for (std::size_t ix : index) {
    require_dim(ix < node_->shape[i], "Tensor::at: index out of range");
    flat = flat * node_->shape[i] + ix;
    ++i;
  }
  return node_->values[flat];
}

std::span<const double> Tensor::grad() const {
  if (node_->grad.empty()) node_->grad.assign(node_->values.size(), 0.0);
  return node_->grad;
}

std::vector<double> Tensor::grad_or_zeros() const {
  if (node_->grad.empty()) return std::vector<double>(node_->values.size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::accumulate_grad(std::span<const double> delta) {
  require_dim(delta.size() == node_->values.size(), "accumulate_grad: size mismatch");
  if (node_->grad.empty()) node_->grad.assign(node_->values.size(), 0.0);
  for (std::size_t i = 0; i < delta.size(); ++i) node_->grad[i] += delta[i];
}

Tensor wrap_node(std::shared_ptr<detail::TensorNode> node) { return Tensor(std::move(node)); }

}  // namespace jloc::num
