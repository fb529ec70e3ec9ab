#pragma once

#include <algorithm>
#include <vector>

#include "fwl/adam.hpp"
#include "fwl/dataset.hpp"
#include "fwl/net.hpp"
#include "fwl/rng.hpp"

namespace fwl {

/// Runs mini-batch steps against a net/optimizer pair with reusable
/// workspaces. The per-sample fidelity weights scale each sample's gradient
/// contribution inside the batch average; step_fidelity scales the whole
/// Adam delta (see adam_step).
class MiniBatchTrainer {
 public:
  MiniBatchTrainer(StudentNet& net, const LossSpec& spec, AdamState& state)
      : net_(net), spec_(spec), state_(state), grads_(net.param_count(), 0.0) {}

  /// One optimizer step on the given sample indices of `data`. `fidelities`
  /// may be null (uniform 1) or must cover every index in the dataset.
  /// Returns the mean data loss of the batch plus the current L2 term.
  double step(const LabeledSet& data, const std::vector<std::size_t>& batch,
              const Vector* fidelities, double step_fidelity = 1.0) {
    if (batch.empty()) throw EmptyDataset("MiniBatchTrainer::step: empty batch");
    grads_.assign(grads_.size(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss_sum = 0.0;
    double fid_sum = 0.0;
    Vector x(data.input_dim()), y(data.label_dim());
    for (const std::size_t i : batch) {
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = data.inputs(i, j);
      for (std::size_t j = 0; j < y.size(); ++j) y[j] = data.labels(i, j);
      const double fid = fidelities ? (*fidelities)[i] : 1.0;
      fid_sum += fid;
      forward_into(net_, x, cache_);
      loss_sum += detail::backprop_accumulate(net_, cache_, y, spec_, fid * inv_b, grads_, scratch_);
    }
    if (spec_.l2 > 0.0) {
      const double factor = 2.0 * spec_.l2 * fid_sum * inv_b;
      std::size_t i = 0;
      net_.for_each_block([&](const double* p, std::size_t n, std::size_t) {
        for (std::size_t k = 0; k < n; ++k, ++i) grads_[i] += factor * p[k];
      });
    }
    adam_step(net_, state_, grads_, step_fidelity);
    double loss = loss_sum * inv_b;
    if (spec_.l2 > 0.0) loss += spec_.l2 * net_.param_squared_norm();
    return loss;
  }

 private:
  StudentNet& net_;
  LossSpec spec_;
  AdamState& state_;
  Vector grads_;
  ForwardCache cache_;
  std::vector<Vector> scratch_;
};

struct TrainOptions {
  std::size_t epochs = 1;
  std::size_t batch_size = 16;
  Vector fidelities;           // per-sample eta2; empty means uniform 1
  double step_fidelity = 1.0;  // scalar eta2 applied to every Adam delta
};

struct TrainTrace {
  Vector epoch_loss;  // mean batch loss per epoch
};

/// Epoch training loop: shuffle, batch, step. Deterministic given the rng.
/// With batch_size 1 a per-sample fidelity scales that sample's whole Adam
/// delta (the per-sample learning-rate rule verbatim); with larger batches
/// each sample's gradient contribution is scaled inside the batch average.
inline TrainTrace train_epochs(StudentNet& net, const LabeledSet& data, const LossSpec& spec,
                               AdamState& state, const TrainOptions& opt, Rng& rng) {
  const std::size_t n = data.size();
  if (n == 0) throw EmptyDataset("train_epochs: empty dataset");
  if (!opt.fidelities.empty() && opt.fidelities.size() != n)
    throw DimensionMismatch("train_epochs: fidelities length mismatch");
  if (opt.batch_size == 0) throw ConfigParse("train_epochs: batch_size must be >= 1");

  const Vector* fid = opt.fidelities.empty() ? nullptr : &opt.fidelities;
  MiniBatchTrainer trainer(net, spec, state);
  TrainTrace trace;
  trace.epoch_loss.reserve(opt.epochs);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<std::size_t> batch;
  batch.reserve(opt.batch_size);

  const bool per_sample_steps = opt.batch_size == 1 && fid != nullptr;
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += opt.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(n, start + opt.batch_size); ++i)
        batch.push_back(order[i]);
      if (per_sample_steps) {
        loss_sum += trainer.step(data, batch, nullptr,
                                 (*fid)[batch.front()] * opt.step_fidelity);
      } else {
        loss_sum += trainer.step(data, batch, fid, opt.step_fidelity);
      }
      ++batches;
    }
    trace.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }
  return trace;
}

}  // namespace fwl
