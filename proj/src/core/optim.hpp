/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "core/tensor.hpp"

namespace jloc::num {

// AdamW with decoupled weight decay: the decay step scales parameters by
// (1 - lr*wd) independently of the moment update.
class AdamW {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-4;
  };

  AdamW(std::vector<Tensor> params, Options options);

  void step();

  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  double learning_rate() const { return options_.learning_rate; }
  const Options& options() const { return options_; }
  std::uint64_t step_count() const { return step_count_; }

  const std::vector<Tensor>& params() const { return params_; }
  // Moment buffers in parameter order, exposed for checkpointing.
  std::vector<double>& first_moment(std::size_t i) { return m_[i]; }
  std::vector<double>& second_moment(std::size_t i) { return v_[i]; }
  void set_step_count(std::uint64_t t) { step_count_ = t; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  Options options_;
  std::uint64_t step_count_ = 0;
};

// Reduce-on-plateau learning-rate schedule. An epoch improves when its metric
// is strictly smaller than the best seen; after more than `patience`
// consecutive non-improving epochs the rate is multiplied by `decay_rate`.
// During the first `warmup_epochs` steps plateau tracking is suspended (the
// rate never increases).
class PlateauScheduler {
 public:
  struct Options {
    double initial_lr = 1e-3;
    double decay_rate = 0.75;
    int patience = 8;
    int warmup_epochs = 0;
  };

  explicit PlateauScheduler(Options options)
      : options_(options), current_lr_(options.initial_lr) {}

  // Feeds one epoch's validation metric; returns the learning rate to use
  // from the next epoch on.
  double step(double metric);

  double learning_rate() const { return current_lr_; }
  double best_metric() const { return best_metric_; }
  int epochs_since_improvement() const { return epochs_since_improvement_; }
  int epochs_seen() const { return epochs_seen_; }

  // Checkpoint restore.
  void restore(double best_metric, int since_improvement, double lr, int epochs_seen);

 private:
  Options options_;
  double current_lr_;
  double best_metric_ = std::numeric_limits<double>::infinity();
  int epochs_since_improvement_ = 0;
  int epochs_seen_ = 0;
};

}  // namespace jloc::num
