/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "core/tensor.hpp"

namespace jloc::num {

// Per-feature running statistics of a normalization layer. Normalization uses
// population (biased) variance; running buffers are updated the same way.
struct RunningStats {
  std::vector<double> mean;
  std::vector<double> var;
  double momentum = 0.1;
  double eps = 1e-5;
  std::uint64_t updates = 0;

  explicit RunningStats(std::size_t features) : mean(features, 0.0), var(features, 1.0) {}
};

enum class NormMode { Train, Eval };

// Records executed operations in topological (execution) order; backward
// replays them once, in reverse.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }
  void set_recording(bool flag) { recording_ = flag; }

  void record(const char* name, std::vector<std::shared_ptr<detail::TensorNode>> inputs,
              std::shared_ptr<detail::TensorNode> output, std::function<void()> backward);

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every
  // requires_grad tensor reachable from the loss. Gradients of parameters not
  // on the path remain zero.
  void backward(const Tensor& loss);

  std::size_t op_count() const { return records_.size(); }
  std::size_t last_backward_visits() const { return last_visits_; }
  void clear();

 private:
  struct Record {
    const char* name;
    std::vector<std::shared_ptr<detail::TensorNode>> inputs;
    std::shared_ptr<detail::TensorNode> output;
    std::function<void()> backward;
  };

  std::vector<Record> records_;
  bool recording_ = true;
  std::size_t last_visits_ = 0;
};

// out[r,j] = sum_f x[r,f] * weight[f,j] + bias[j]; x may be rank 2 or 3 (the
// leading extents are flattened into rows).
Tensor linear(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor leaky_relu(Tape& tape, const Tensor& x, double slope);

// Normalizes every feature column over the flattened row axis (the point or
// edge axis; batch size is 1 everywhere in this project).
Tensor batch_norm_points(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         RunningStats& stats, NormMode mode);

// Fused batch_norm_points + leaky_relu. Same semantics, one pass and one
// intermediate less; the model's hot path.
Tensor bn_leaky_relu(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                     RunningStats& stats, NormMode mode, double slope);

// Column-wise softmax over the point axis of an N x J logit matrix.
Tensor softmax_over_points(Tape& tape, const Tensor& logits);

// {N,k,F} -> {N,F} maximum over the neighbour axis. Gradient routes to the
// first maximal neighbour.
Tensor neighbor_max_pool(Tape& tape, const Tensor& edge_feats);

Tensor concat_features(Tape& tape, std::span<const Tensor> parts);

// {N,F} + {N,k} neighbour indices -> {N,k,2F} rows (x_i, x_j - x_i).
Tensor edge_features(Tape& tape, const Tensor& x, const IndexMatrix& nbrs);

// Equivalent to linear(edge_features(x, nbrs), weight, bias) but computed
// from two N-row matrix products plus a gather, never materializing the
// {N,k,2F} edge tensor.
Tensor edge_mlp_linear(Tape& tape, const Tensor& x, const IndexMatrix& nbrs,
                       const Tensor& weight, const Tensor& bias);

// {N,J} coefficients, {N,C} points -> {J,C} = coeffs^T * points.
Tensor convex_combine(Tape& tape, const Tensor& coeffs, const Tensor& points);

// Scalar sum of squared differences.
Tensor sum_squared_error(Tape& tape, const Tensor& a, const Tensor& b);

}  // namespace jloc::num
