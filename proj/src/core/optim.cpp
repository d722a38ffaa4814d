/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "core/optim.hpp"

#include <cmath>
#include <limits>

namespace jloc::num {

AdamW::AdamW(std::vector<Tensor> params, Options options)
    : params_(std::move(params)), options_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    require_arg(p.requires_grad(), "AdamW: parameter without requires_grad");
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void AdamW::step() {
  ++step_count_;
  const double lr = options_.learning_rate;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double eps = options_.epsilon;
  const double wd = options_.weight_decay;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));

  for (std::size_t p = 0; p < params_.size(); ++p) {
    auto vals = params_[p].values_mut();
    const auto grads = params_[p].grad_or_zeros();
    require_dim(grads.size() == vals.size(), "AdamW: gradient shape mismatch");
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < vals.size(); ++i) {
      vals[i] -= lr * wd * vals[i];  // decoupled decay
      const double g = grads[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double mhat = m[i] / bias1;
      const double vhat = v[i] / bias2;
      vals[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

double PlateauScheduler::step(double metric) {
  require_numeric(std::isfinite(metric), "PlateauScheduler: non-finite metric");
  ++epochs_seen_;
  if (epochs_seen_ <= options_.warmup_epochs) {
    if (metric < best_metric_) best_metric_ = metric;
    return current_lr_;
  }
  if (metric < best_metric_) {
    best_metric_ = metric;
    epochs_since_improvement_ = 0;
  } else {
    ++epochs_since_improvement_;
    if (epochs_since_improvement_ > options_.patience) {
      current_lr_ *= options_.decay_rate;
      epochs_since_improvement_ = 0;
    }
  }
  return current_lr_;
}

void PlateauScheduler::restore(double best_metric, int since_improvement, double lr,
                               int epochs_seen) {
  best_metric_ = best_metric;
  epochs_since_improvement_ = since_improvement;
  current_lr_ = lr;
  epochs_seen_ = epochs_seen;
}

}  // namespace jloc::num
