/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "core/tape.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace jloc::num {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<RowMat>;
using MapC = Eigen::Map<const RowMat>;

// Fixed block size keeps parallel reduction order independent of the thread
// count, so results are bit-reproducible.
constexpr std::size_t kBlockRows = 8192;

std::shared_ptr<detail::TensorNode> make_node(Shape shape, std::size_t numel) {
  auto node = std::make_shared<detail::TensorNode>();
  node->shape = std::move(shape);
  node->values.assign(numel, 0.0);
  return node;
}

void debug_check_finite(const detail::TensorNode& node, const char* op) {
#ifndef NDEBUG
  for (double v : node.values) {
    if (!std::isfinite(v)) raise(ErrorKind::Numeric, std::string(op) + ": non-finite output");
  }
#else
  (void)node;
  (void)op;
#endif
}

std::span<const double> out_grad(const std::shared_ptr<detail::TensorNode>& node) {
  return node->grad;
}

std::span<double> grad_buffer(const std::shared_ptr<detail::TensorNode>& node) {
  if (node->grad.empty()) node->grad.assign(node->values.size(), 0.0);
  return node->grad;
}

// Column sums over a row-major [rows x cols] array, blocked and deterministic.
void column_sums(const double* data, std::size_t rows, std::size_t cols, double* out) {
  const std::size_t nblocks = (rows + kBlockRows - 1) / kBlockRows;
  std::vector<double> partial(nblocks * cols, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
    double* acc = partial.data() + static_cast<std::size_t>(b) * cols;
    const std::size_t lo = static_cast<std::size_t>(b) * kBlockRows;
    const std::size_t hi = std::min(rows, lo + kBlockRows);
    for (std::size_t r = lo; r < hi; ++r) {
      const double* row = data + r * cols;
      for (std::size_t c = 0; c < cols; ++c) acc[c] += row[c];
    }
  }
  std::fill(out, out + cols, 0.0);
  for (std::size_t b = 0; b < nblocks; ++b) {
    const double* acc = partial.data() + b * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += acc[c];
  }
}

// Per-column sum of x and x^2 in one pass.
void column_moments(const double* data, std::size_t rows, std::size_t cols, double* sum,
                    double* sumsq) {
  const std::size_t nblocks = (rows + kBlockRows - 1) / kBlockRows;
  std::vector<double> partial(nblocks * cols * 2, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
    double* acc = partial.data() + static_cast<std::size_t>(b) * cols * 2;
    double* acc2 = acc + cols;
    const std::size_t lo = static_cast<std::size_t>(b) * kBlockRows;
    const std::size_t hi = std::min(rows, lo + kBlockRows);
    for (std::size_t r = lo; r < hi; ++r) {
      const double* row = data + r * cols;
      for (std::size_t c = 0; c < cols; ++c) {
        acc[c] += row[c];
        acc2[c] += row[c] * row[c];
      }
    }
  }
  std::fill(sum, sum + cols, 0.0);
  std::fill(sumsq, sumsq + cols, 0.0);
  for (std::size_t b = 0; b < nblocks; ++b) {
    const double* acc = partial.data() + b * cols * 2;
    for (std::size_t c = 0; c < cols; ++c) {
      sum[c] += acc[c];
      sumsq[c] += acc[c + cols];
    }
  }
}

bool want_record(const Tape& tape, std::initializer_list<const Tensor*> inputs) {
  if (!tape.recording()) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

Shape with_last(const Shape& shape, std::size_t last) {
  Shape s = shape;
  s.back() = last;
  return s;
}

}  // namespace

void Tape::record(const char* name, std::vector<std::shared_ptr<detail::TensorNode>> inputs,
                  std::shared_ptr<detail::TensorNode> output, std::function<void()> backward) {
  output->requires_grad = true;
  output->tape_output = true;
  records_.push_back({name, std::move(inputs), std::move(output), std::move(backward)});
}

void Tape::backward(const Tensor& loss) {
  require_dim(loss.defined() && loss.numel() == 1, "backward: loss must be a scalar");
  require_arg(loss.node()->tape_output, "backward: loss is not an output of this tape");
  loss.node()->grad.assign(1, 1.0);
  last_visits_ = 0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    it->backward();
    ++last_visits_;
  }
}

void Tape::clear() {
  records_.clear();
  last_visits_ = 0;
}

// ---------------------------------------------------------------------------

Tensor linear(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_dim(x.rank() >= 2, "linear: input must have rank >= 2, got " + shape_str(x.shape()));
  require_dim(weight.rank() == 2, "linear: weight must be a matrix");
  const std::size_t rows = x.rows();
  const std::size_t fin = x.cols();
  const std::size_t fout = weight.extent(1);
  require_dim(weight.extent(0) == fin, "linear: weight " + shape_str(weight.shape()) +
                                           " does not accept input " + shape_str(x.shape()));
  require_dim(bias.rank() == 1 && bias.extent(0) == fout, "linear: bias size mismatch");

  auto out = make_node(with_last(x.shape(), fout), rows * fout);
  {
    MapC xm(x.values().data(), rows, fin);
    MapC wm(weight.values().data(), fin, fout);
    MapM ym(out->values.data(), rows, fout);
    ym.noalias() = xm * wm;
    Eigen::Map<const Eigen::RowVectorXd> bv(bias.values().data(), fout);
    ym.rowwise() += bv;
  }
  debug_check_finite(*out, "linear");

  if (want_record(tape, {&x, &weight, &bias})) {
    auto xn = x.node(), wn = weight.node(), bn = bias.node();
    auto on = out;
    tape.record("linear", {xn, wn, bn}, on, [xn, wn, bn, on, rows, fin, fout]() {
      auto dy = out_grad(on);
      if (dy.empty()) return;
      MapC dym(dy.data(), rows, fout);
      if (xn->requires_grad) {
        MapM dxm(grad_buffer(xn).data(), rows, fin);
        MapC wm(wn->values.data(), fin, fout);
        dxm.noalias() += dym * wm.transpose();
      }
      if (wn->requires_grad) {
        MapM dwm(grad_buffer(wn).data(), fin, fout);
        MapC xm(xn->values.data(), rows, fin);
        dwm.noalias() += xm.transpose() * dym;
      }
      if (bn->requires_grad) {
        std::vector<double> csum(fout);
        column_sums(dy.data(), rows, fout, csum.data());
        auto db = grad_buffer(bn);
        for (std::size_t c = 0; c < fout; ++c) db[c] += csum[c];
      }
    });
  }
  return wrap_node(out);
}

Tensor leaky_relu(Tape& tape, const Tensor& x, double slope) {
  require_arg(slope > 0.0 && slope < 1.0, "leaky_relu: slope must be in (0,1)");
  const std::size_t n = x.numel();
  auto out = make_node(x.shape(), n);
  const double* xv = x.values().data();
  double* ov = out->values.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    ov[i] = xv[i] >= 0.0 ? xv[i] : slope * xv[i];
  }

  if (want_record(tape, {&x})) {
    auto xn = x.node();
    auto on = out;
    tape.record("leaky_relu", {xn}, on, [xn, on, slope, n]() {
      auto dy = out_grad(on);
      if (dy.empty()) return;
      auto dx = grad_buffer(xn);
      const double* xv2 = xn->values.data();
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        dx[i] += dy[i] * (xv2[i] >= 0.0 ? 1.0 : slope);
      }
    });
  }
  return wrap_node(out);
}

namespace {

// Shared forward/backward for batch norm with optional fused leaky ReLU.
Tensor norm_activation(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       RunningStats& stats, NormMode mode, bool fuse_act, double slope,
                       const char* op_name) {
  require_dim(x.rank() >= 2, std::string(op_name) + ": input must have rank >= 2");
  const std::size_t rows = x.rows();
  const std::size_t f = x.cols();
  require_dim(gamma.rank() == 1 && gamma.extent(0) == f, std::string(op_name) + ": gamma size");
  require_dim(beta.rank() == 1 && beta.extent(0) == f, std::string(op_name) + ": beta size");
  require_dim(stats.mean.size() == f, std::string(op_name) + ": running stats size");
  if (mode == NormMode::Train) {
    require_dim(rows >= 2, std::string(op_name) + ": degenerate batch (need >= 2 rows in train mode)");
  }

  std::vector<double> mean(f), inv_std(f);
  if (mode == NormMode::Train) {
    std::vector<double> sum(f), sumsq(f);
    column_moments(x.values().data(), rows, f, sum.data(), sumsq.data());
    const double inv_rows = 1.0 / static_cast<double>(rows);
    for (std::size_t c = 0; c < f; ++c) {
      mean[c] = sum[c] * inv_rows;
      double var = sumsq[c] * inv_rows - mean[c] * mean[c];
      if (var < 0.0) var = 0.0;  // cancellation guard
      inv_std[c] = 1.0 / std::sqrt(var + stats.eps);
      stats.mean[c] = (1.0 - stats.momentum) * stats.mean[c] + stats.momentum * mean[c];
      stats.var[c] = (1.0 - stats.momentum) * stats.var[c] + stats.momentum * var;
    }
    stats.updates++;
  } else {
    for (std::size_t c = 0; c < f; ++c) {
      mean[c] = stats.mean[c];
      inv_std[c] = 1.0 / std::sqrt(stats.var[c] + stats.eps);
    }
  }

  auto out = make_node(x.shape(), rows * f);
  {
    const double* xv = x.values().data();
    const double* gv = gamma.values().data();
    const double* bv = beta.values().data();
    double* ov = out->values.data();
    const double* mv = mean.data();
    const double* sv = inv_std.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
      const double* xr = xv + static_cast<std::size_t>(r) * f;
      double* orow = ov + static_cast<std::size_t>(r) * f;
      for (std::size_t c = 0; c < f; ++c) {
        double y = gv[c] * ((xr[c] - mv[c]) * sv[c]) + bv[c];
        if (fuse_act && y < 0.0) y *= slope;
        orow[c] = y;
      }
    }
  }
  debug_check_finite(*out, op_name);

  if (want_record(tape, {&x, &gamma, &beta})) {
    auto xn = x.node(), gn = gamma.node(), bn = beta.node();
    auto on = out;
    const bool train = mode == NormMode::Train;
    tape.record(op_name, {xn, gn, bn}, on,
                [xn, gn, bn, on, mean, inv_std, rows, f, train, fuse_act, slope]() {
      auto dyspan = out_grad(on);
      if (dyspan.empty()) return;
      const double* dy = dyspan.data();
      const double* xv = xn->values.data();
      const double* gv = gn->values.data();
      const double* outv = on->values.data();
      const double* mv = mean.data();
      const double* sv = inv_std.data();

      // Reduce sum(dz) and sum(dz * xhat) per channel; dz is the gradient at
      // the normalization output (activation mask folded in when fused).
      const std::size_t nblocks = (rows + kBlockRows - 1) / kBlockRows;
      std::vector<double> partial(nblocks * f * 2, 0.0);
#pragma omp parallel for schedule(static)
      for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
        double* acc = partial.data() + static_cast<std::size_t>(b) * f * 2;
        double* acc2 = acc + f;
        const std::size_t lo = static_cast<std::size_t>(b) * kBlockRows;
        const std::size_t hi = std::min(rows, lo + kBlockRows);
        for (std::size_t r = lo; r < hi; ++r) {
          const std::size_t base = r * f;
          for (std::size_t c = 0; c < f; ++c) {
            double dz = dy[base + c];
            if (fuse_act && outv[base + c] < 0.0) dz *= slope;
            const double xhat = (xv[base + c] - mv[c]) * sv[c];
            acc[c] += dz;
            acc2[c] += dz * xhat;
          }
        }
      }
      std::vector<double> sum_dz(f, 0.0), sum_dz_xhat(f, 0.0);
      for (std::size_t b = 0; b < nblocks; ++b) {
        const double* acc = partial.data() + b * f * 2;
        for (std::size_t c = 0; c < f; ++c) {
          sum_dz[c] += acc[c];
          sum_dz_xhat[c] += acc[c + f];
        }
      }

      if (gn->requires_grad) {
        auto dg = grad_buffer(gn);
        for (std::size_t c = 0; c < f; ++c) dg[c] += sum_dz_xhat[c];
      }
      if (bn->requires_grad) {
        auto db = grad_buffer(bn);
        for (std::size_t c = 0; c < f; ++c) db[c] += sum_dz[c];
      }
      if (xn->requires_grad) {
        auto dx = grad_buffer(xn);
        const double inv_rows = 1.0 / static_cast<double>(rows);
#pragma omp parallel for schedule(static)
        for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
          const std::size_t base = static_cast<std::size_t>(r) * f;
          for (std::size_t c = 0; c < f; ++c) {
            double dz = dy[base + c];
            if (fuse_act && outv[base + c] < 0.0) dz *= slope;
            const double xhat = (xv[base + c] - mv[c]) * sv[c];
            if (train) {
              dx[base + c] += gv[c] * sv[c] * inv_rows *
                              (static_cast<double>(rows) * dz - sum_dz[c] - xhat * sum_dz_xhat[c]);
            } else {
              dx[base + c] += dz * gv[c] * sv[c];
            }
          }
        }
      }
    });
  }
  return wrap_node(out);
}

}  // namespace

Tensor batch_norm_points(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         RunningStats& stats, NormMode mode) {
  return norm_activation(tape, x, gamma, beta, stats, mode, false, 0.0, "batch_norm_points");
}

Tensor bn_leaky_relu(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                     RunningStats& stats, NormMode mode, double slope) {
  require_arg(slope > 0.0 && slope < 1.0, "bn_leaky_relu: slope must be in (0,1)");
  return norm_activation(tape, x, gamma, beta, stats, mode, true, slope, "bn_leaky_relu");
}

Tensor softmax_over_points(Tape& tape, const Tensor& logits) {
  require_dim(logits.rank() == 2, "softmax_over_points: expected N x J logits");
  require_numeric(all_finite(logits.values()), "softmax_over_points: non-finite logits");
  const std::size_t n = logits.extent(0);
  const std::size_t j = logits.extent(1);

  auto out = make_node(logits.shape(), n * j);
  {
    const double* lv = logits.values().data();
    double* ov = out->values.data();
    std::vector<double> colmax(j, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = lv + r * j;
      for (std::size_t c = 0; c < j; ++c) colmax[c] = std::max(colmax[c], row[c]);
    }
    std::vector<double> colsum(j, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = lv + r * j;
      double* orow = ov + r * j;
      for (std::size_t c = 0; c < j; ++c) {
        orow[c] = std::exp(row[c] - colmax[c]);
        colsum[c] += orow[c];
      }
    }
    for (std::size_t c = 0; c < j; ++c) colsum[c] = 1.0 / colsum[c];
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(n); ++r) {
      double* orow = ov + static_cast<std::size_t>(r) * j;
      for (std::size_t c = 0; c < j; ++c) orow[c] *= colsum[c];
    }
  }

  if (want_record(tape, {&logits})) {
    auto ln = logits.node();
    auto on = out;
    tape.record("softmax_over_points", {ln}, on, [ln, on, n, j]() {
      auto dy = out_grad(on);
      if (dy.empty()) return;
      const double* sv = on->values.data();
      std::vector<double> dots(j, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t base = r * j;
        for (std::size_t c = 0; c < j; ++c) dots[c] += dy[base + c] * sv[base + c];
      }
      auto dx = grad_buffer(ln);
#pragma omp parallel for schedule(static)
      for (std::int64_t r = 0; r < static_cast<std::int64_t>(n); ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * j;
        for (std::size_t c = 0; c < j; ++c) {
          dx[base + c] += sv[base + c] * (dy[base + c] - dots[c]);
        }
      }
    });
  }
  return wrap_node(out);
}

Tensor neighbor_max_pool(Tape& tape, const Tensor& edge_feats) {
  require_dim(edge_feats.rank() == 3, "neighbor_max_pool: expected {N,k,F} input");
  const std::size_t n = edge_feats.extent(0);
  const std::size_t k = edge_feats.extent(1);
  const std::size_t f = edge_feats.extent(2);
  require_dim(k >= 1, "neighbor_max_pool: k must be >= 1");

  auto out = make_node(Shape{n, f}, n * f);
  auto argmax = std::make_shared<std::vector<std::int32_t>>(n * f, 0);
  {
    const double* ev = edge_feats.values().data();
    double* ov = out->values.data();
    std::int32_t* am = argmax->data();
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      const double* block = ev + i * k * f;
      double* orow = ov + i * f;
      std::int32_t* arow = am + i * f;
      for (std::size_t c = 0; c < f; ++c) {
        orow[c] = block[c];
        arow[c] = 0;
      }
      for (std::size_t m = 1; m < k; ++m) {
        const double* row = block + m * f;
        for (std::size_t c = 0; c < f; ++c) {
          if (row[c] > orow[c]) {  // strict: ties keep the lowest index
            orow[c] = row[c];
            arow[c] = static_cast<std::int32_t>(m);
          }
        }
      }
    }
  }

  if (want_record(tape, {&edge_feats})) {
    auto en = edge_feats.node();
    auto on = out;
    tape.record("neighbor_max_pool", {en}, on, [en, on, argmax, n, k, f]() {
      auto dy = out_grad(on);
      if (dy.empty()) return;
      auto dx = grad_buffer(en);
      const std::int32_t* am = argmax->data();
#pragma omp parallel for schedule(static)
      for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        for (std::size_t c = 0; c < f; ++c) {
          const std::size_t m = static_cast<std::size_t>(am[i * f + c]);
          dx[(i * k + m) * f + c] += dy[i * f + c];
        }
      }
    });
  }
  return wrap_node(out);
}

Tensor concat_features(Tape& tape, std::span<const Tensor> parts) {
  require_arg(!parts.empty(), "concat_features: no parts");
  const std::size_t n = parts[0].extent(0);
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    require_dim(p.rank() == 2, "concat_features: parts must be rank 2");
    require_dim(p.extent(0) == n, "concat_features: row count mismatch (" +
                                      std::to_string(p.extent(0)) + " vs " + std::to_string(n) + ")");
    total += p.extent(1);
  }

  auto out = make_node(Shape{n, total}, n * total);
  {
    double* ov = out->values.data();
    std::size_t off = 0;
    for (const Tensor& p : parts) {
      const std::size_t f = p.extent(1);
      const double* pv = p.values().data();
#pragma omp parallel for schedule(static)
      for (std::int64_t r = 0; r < static_cast<std::int64_t>(n); ++r) {
        std::memcpy(ov + static_cast<std::size_t>(r) * total + off,
                    pv + static_cast<std::size_t>(r) * f, f * sizeof(double));
      }
      off += f;
    }
  }

  bool rg = false;
  for (const Tensor& p : parts) rg = rg || p.requires_grad();
  if (tape.recording() && rg) {
    std::vector<std::shared_ptr<detail::TensorNode>> nodes;
    std::vector<std::size_t> widths;
    for (const Tensor& p : parts) {
      nodes.push_back(p.node());
      widths.push_back(p.extent(1));
    }
    auto on = out;
    tape.record("concat_features", nodes, on, [nodes, widths, on, n, total]() {
      auto dy = out_grad(on);
      if (dy.empty()) return;
      std::size_t off = 0;
      for (std::size_t p = 0; p < nodes.size(); ++p) {
        const std::size_t f = widths[p];
        if (nodes[p]->requires_grad) {
          auto dx = grad_buffer(nodes[p]);
          for (std::size_t r = 0; r < n; ++r) {
            const double* src = dy.data() + r * total + off;
            double* dst = dx.data() + r * f;
            for (std::size_t c = 0; c < f; ++c) dst[c] += src[c];
          }
        }
        off += f;
      }
    });
  }
  return wrap_node(out);
}

namespace {

void check_neighbors(const IndexMatrix& nbrs, std::size_t n, const char* op) {
  require_dim(nbrs.rows == n, std::string(op) + ": neighbour rows != point count");
  require_dim(nbrs.cols >= 1, std::string(op) + ": empty neighbour lists");
  for (std::int32_t ix : nbrs.idx) {
    require_dim(ix >= 0 && static_cast<std::size_t>(ix) < n,
                std::string(op) + ": neighbour index out of range");
  }
}

}  // namespace

Tensor edge_features(Tape& tape, const Tensor& x, const IndexMatrix& nbrs) {
  require_dim(x.rank() == 2, "edge_features: expected {N,F} input");
  const std::size_t n = x.extent(0);
  const std::size_t f = x.extent(1);
  check_neighbors(nbrs, n, "edge_features");
  const std::size_t k = nbrs.cols;

  auto out = make_node(Shape{n, k, 2 * f}, n * k * 2 * f);
  {
    const double* xv = x.values().data();
    double* ov = out->values.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      const double* xi = xv + i * f;
      for (std::size_t m = 0; m < k; ++m) {
        const double* xj = xv + static_cast<std::size_t>(nbrs.at(i, m)) * f;
        double* row = ov + (i * k + m) * 2 * f;
        for (std::size_t c = 0; c < f; ++c) {
          row[c] = xi[c];
          row[f + c] = xj[c] - xi[c];
        }
      }
    }
  }

  if (want_record(tape, {&x})) {
    auto xn = x.node();
    auto on = out;
    auto idx = std::make_shared<IndexMatrix>(nbrs);
    tape.record("edge_features", {xn}, on, [xn, on, idx, n, k, f]() {
      auto dy = out_grad(on);
      if (dy.empty()) return;
      auto dx = grad_buffer(xn);
      for (std::size_t i = 0; i < n; ++i) {
        double* dxi = dx.data() + i * f;
        for (std::size_t m = 0; m < k; ++m) {
          const double* row = dy.data() + (i * k + m) * 2 * f;
          double* dxj = dx.data() + static_cast<std::size_t>(idx->at(i, m)) * f;
          for (std::size_t c = 0; c < f; ++c) {
            dxi[c] += row[c] - row[f + c];
            dxj[c] += row[f + c];
          }
        }
      }
    });
  }
  return wrap_node(out);
}

Tensor edge_mlp_linear(Tape& tape, const Tensor& x, const IndexMatrix& nbrs,
                       const Tensor& weight, const Tensor& bias) {
  require_dim(x.rank() == 2, "edge_mlp_linear: expected {N,F} input");
  const std::size_t n = x.extent(0);
  const std::size_t f = x.extent(1);
  check_neighbors(nbrs, n, "edge_mlp_linear");
  const std::size_t k = nbrs.cols;
  require_dim(weight.rank() == 2 && weight.extent(0) == 2 * f,
              "edge_mlp_linear: weight must be {2F," + std::to_string(weight.extent(1)) + "}");
  const std::size_t fout = weight.extent(1);
  require_dim(bias.rank() == 1 && bias.extent(0) == fout, "edge_mlp_linear: bias size mismatch");

  // weight = [Wa; Wb] over the (x_i, x_j - x_i) halves:
  //   y(i,m) = x_i*(Wa - Wb) + x_{j(i,m)}*Wb + bias
  std::vector<double> p(n * fout), q(n * fout);
  {
    MapC xm(x.values().data(), n, f);
    MapC wa(weight.values().data(), f, fout);
    MapC wb(weight.values().data() + f * fout, f, fout);
    MapM pm(p.data(), n, fout);
    MapM qm(q.data(), n, fout);
    qm.noalias() = xm * wb;
    pm.noalias() = xm * (wa - wb);
  }

  auto out = make_node(Shape{n, k, fout}, n * k * fout);
  {
    double* ov = out->values.data();
    const double* bv = bias.values().data();
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      const double* pi = p.data() + i * fout;
      for (std::size_t m = 0; m < k; ++m) {
        const double* qj = q.data() + static_cast<std::size_t>(nbrs.at(i, m)) * fout;
        double* row = ov + (i * k + m) * fout;
        for (std::size_t c = 0; c < fout; ++c) row[c] = pi[c] + qj[c] + bv[c];
      }
    }
  }
  debug_check_finite(*out, "edge_mlp_linear");

  if (want_record(tape, {&x, &weight, &bias})) {
    auto xn = x.node(), wn = weight.node(), bn = bias.node();
    auto on = out;
    auto idx = std::make_shared<IndexMatrix>(nbrs);
    tape.record("edge_mlp_linear", {xn, wn, bn}, on, [xn, wn, bn, on, idx, n, k, f, fout]() {
      auto dy = out_grad(on);
      if (dy.empty()) return;

      // r_i = sum_m dy(i,m); s_j = sum over edges targeting j.
      std::vector<double> r(n * fout, 0.0), s(n * fout, 0.0);
#pragma omp parallel for schedule(static)
      for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        double* ri = r.data() + i * fout;
        for (std::size_t m = 0; m < k; ++m) {
          const double* row = dy.data() + (i * k + m) * fout;
          for (std::size_t c = 0; c < fout; ++c) ri[c] += row[c];
        }
      }
      for (std::size_t i = 0; i < n; ++i) {  // serial scatter: deterministic
        for (std::size_t m = 0; m < k; ++m) {
          double* sj = s.data() + static_cast<std::size_t>(idx->at(i, m)) * fout;
          const double* row = dy.data() + (i * k + m) * fout;
          for (std::size_t c = 0; c < fout; ++c) sj[c] += row[c];
        }
      }

      MapC rm(r.data(), n, fout);
      MapC sm(s.data(), n, fout);
      MapC xm(xn->values.data(), n, f);
      MapC wa(wn->values.data(), f, fout);
      MapC wb(wn->values.data() + f * fout, f, fout);

      if (xn->requires_grad) {
        MapM dxm(grad_buffer(xn).data(), n, f);
        dxm.noalias() += rm * (wa - wb).transpose();
        dxm.noalias() += sm * wb.transpose();
      }
      if (wn->requires_grad) {
        auto dw = grad_buffer(wn);
        MapM dwa(dw.data(), f, fout);
        MapM dwb(dw.data() + f * fout, f, fout);
        dwa.noalias() += xm.transpose() * rm;
        dwb.noalias() += xm.transpose() * (sm - rm);
      }
      if (bn->requires_grad) {
        auto db = grad_buffer(bn);
        std::vector<double> csum(fout, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double* ri = r.data() + i * fout;
          for (std::size_t c = 0; c < fout; ++c) csum[c] += ri[c];
        }
        for (std::size_t c = 0; c < fout; ++c) db[c] += csum[c];
      }
    });
  }
  return wrap_node(out);
}

Tensor convex_combine(Tape& tape, const Tensor& coeffs, const Tensor& points) {
  require_dim(coeffs.rank() == 2, "convex_combine: coefficients must be {N,J}");
  require_dim(points.rank() == 2, "convex_combine: points must be {N,C}");
  const std::size_t n = coeffs.extent(0);
  const std::size_t j = coeffs.extent(1);
  const std::size_t c = points.extent(1);
  require_dim(points.extent(0) == n, "convex_combine: row count mismatch");

  auto out = make_node(Shape{j, c}, j * c);
  {
    MapC am(coeffs.values().data(), n, j);
    MapC pm(points.values().data(), n, c);
    MapM om(out->values.data(), j, c);
    om.noalias() = am.transpose() * pm;
  }

  if (want_record(tape, {&coeffs, &points})) {
    auto an = coeffs.node(), pn = points.node();
    auto on = out;
    tape.record("convex_combine", {an, pn}, on, [an, pn, on, n, j, c]() {
      auto dy = out_grad(on);
      if (dy.empty()) return;
      MapC dym(dy.data(), j, c);
      if (an->requires_grad) {
        MapM dam(grad_buffer(an).data(), n, j);
        MapC pm(pn->values.data(), n, c);
        dam.noalias() += pm * dym.transpose();
      }
      if (pn->requires_grad) {
        MapM dpm(grad_buffer(pn).data(), n, c);
        MapC am(an->values.data(), n, j);
        dpm.noalias() += am * dym;
      }
    });
  }
  return wrap_node(out);
}

Tensor sum_squared_error(Tape& tape, const Tensor& a, const Tensor& b) {
  require_dim(a.shape() == b.shape(), "sum_squared_error: shape mismatch " + shape_str(a.shape()) +
                                          " vs " + shape_str(b.shape()));
  const std::size_t n = a.numel();
  double total = 0.0;
  {
    const double* av = a.values().data();
    const double* bv = b.values().data();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = av[i] - bv[i];
      total += d * d;
    }
  }
  auto out = make_node(Shape{1}, 1);
  out->values[0] = total;
  debug_check_finite(*out, "sum_squared_error");

  if (want_record(tape, {&a, &b})) {
    auto an = a.node(), bn = b.node();
    auto on = out;
    tape.record("sum_squared_error", {an, bn}, on, [an, bn, on, n]() {
      auto dy = out_grad(on);
      if (dy.empty()) return;
      const double g = dy[0];
      const double* av = an->values.data();
      const double* bv = bn->values.data();
      if (an->requires_grad) {
        auto da = grad_buffer(an);
        for (std::size_t i = 0; i < n; ++i) da[i] += 2.0 * g * (av[i] - bv[i]);
      }
      if (bn->requires_grad) {
        auto db = grad_buffer(bn);
        for (std::size_t i = 0; i < n; ++i) db[i] -= 2.0 * g * (av[i] - bv[i]);
      }
    });
  }
  return wrap_node(out);
}

}  // namespace jloc::num
