#pragma once

// Real World / Ideal World training loops, the coupled runner, the
// G-function evaluator over explicit sample sequences, and the stop rule.
//
// Stream layout for one run with master seed s:
//   init             parameters (shared by both worlds)
//   trainset         the Real World's n samples
//   real_data        minibatch order / resampling indices of the Real World
//   ideal_data       fresh oracle draws of the Ideal World
//   real_augment,
//   ideal_augment    per-sample augmentation noise
//   eval             the test set of m samples (shared by both worlds)
//   ideal_train_eval the Ideal World's held-out "train" batch of m samples

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "deepboot/distributions.hpp"
#include "deepboot/error.hpp"
#include "deepboot/metrics.hpp"
#include "deepboot/model.hpp"
#include "deepboot/optimizers.hpp"
#include "deepboot/rng.hpp"

namespace deepboot {

enum class RealSampling { epoch_shuffle, with_replacement };

struct WorldConfig {
  std::shared_ptr<const DistributionOracle> oracle;
  // Test-set source; defaults to `oracle`.
  std::shared_ptr<const DistributionOracle> eval_oracle;
  // Real World train set; drawn from `oracle` with the master seed when unset.
  std::shared_ptr<const TrainSet> trainset;
  std::size_t n = 1000;
  ModelSpec model;
  OptimizerSpec optimizer;
  std::size_t total_steps = 1000;
  Augmentation augmentation = NoAugmentation{};
  std::uint64_t master_seed = 0;
  std::size_t eval_every = 100;
  std::size_t eval_samples = 10000;
  double stop_threshold = 0.01;
  RealSampling real_sampling = RealSampling::epoch_shuffle;

  const DistributionOracle& test_oracle() const { return eval_oracle ? *eval_oracle : *oracle; }
};

struct IidSequence {};
struct WithReplacementSequence {
  std::shared_ptr<const TrainSet> trainset;
};
struct EpochShuffleSequence {
  std::shared_ptr<const TrainSet> trainset;
};

using SequenceMode = std::variant<IidSequence, WithReplacementSequence, EpochShuffleSequence>;

inline const TrainSet* finite_trainset(const SequenceMode& mode) noexcept {
  if (const auto* w = std::get_if<WithReplacementSequence>(&mode)) return w->trainset.get();
  if (const auto* e = std::get_if<EpochShuffleSequence>(&mode)) return e->trainset.get();
  return nullptr;
}

// Converts oracle labels to the encoding the model head expects:
// softmax heads take class indices (sign labels become {0, 1}); a single-output
// mse head takes real targets (binary classes become -1 / +1); a k-output mse
// head takes class indices that the loss one-hot encodes.
inline std::vector<double> encode_labels(const LabelInfo& info, const Head& head, std::vector<double> labels) {
  const std::size_t k = head_outputs(head);
  const bool scalar_mse = !is_softmax(head) && k == 1;
  switch (info.kind) {
    case LabelInfo::Kind::real:
      if (!scalar_mse) throw ConfigError("real-valued labels need a single-output mse head", "model.head");
      return labels;
    case LabelInfo::Kind::sign:
      if (scalar_mse) return labels;
      for (double& y : labels) y = y > 0.0 ? 1.0 : 0.0;
      return labels;
    case LabelInfo::Kind::classes:
      if (scalar_mse) {
        if (info.classes != 2) throw ConfigError("a single-output mse head needs 2 classes", "model.head");
        for (double& y : labels) y = y > 0.5 ? 1.0 : -1.0;
        return labels;
      }
      if (info.classes > k)
        throw ConfigError("oracle has " + std::to_string(info.classes) + " classes but the head has " +
                              std::to_string(k) + " outputs",
                          "model.head");
      return labels;
  }
  return labels;
}

inline void validate(const WorldConfig& c) {
  if (!c.oracle) throw ConfigError("oracle is required", "oracle");
  validate(c.model);
  validate(c.optimizer);
  validate(c.augmentation);
  if (c.model.input_dim != c.oracle->input_dim())
    throw ConfigError("model input_dim " + std::to_string(c.model.input_dim) + " != oracle dim " +
                          std::to_string(c.oracle->input_dim()),
                      "model.input_dim");
  if (c.test_oracle().input_dim() != c.oracle->input_dim())
    throw ConfigError("eval oracle dimension differs from training oracle", "eval_oracle");
  if (c.n < 1) throw ConfigError("n must be >= 1", "n");
  if (c.total_steps < 1) throw ConfigError("steps must be >= 1", "steps");
  if (c.eval_every < 1) throw ConfigError("eval_every must be >= 1", "eval_every");
  if (c.eval_samples < 1) throw ConfigError("eval_samples must be >= 1", "eval_samples");
  check_threshold(c.stop_threshold);
  if (c.trainset && c.trainset->size() != c.n)
    throw ConfigError("explicit train set has " + std::to_string(c.trainset->size()) + " rows, n is " +
                          std::to_string(c.n),
                      "n");
  // Probes that the label encodings are compatible with the head.
  encode_labels(c.oracle->label_info(), c.model.head, {});
  encode_labels(c.test_oracle().label_info(), c.model.head, {});
}

// Produces the minibatches a world trains on, one step at a time. Labels come
// out head-encoded; inputs come out augmented.
class BatchSource {
 public:
  BatchSource(const WorldConfig& config, SequenceMode mode)
      : config_(config),
        mode_(std::move(mode)),
        info_(config.oracle->label_info()),
        data_rng_(RngStream::derive(config.master_seed, std::holds_alternative<IidSequence>(mode_)
                                                            ? StreamPurpose::ideal_data
                                                            : StreamPurpose::real_data)),
        aug_rng_(RngStream::derive(config.master_seed, std::holds_alternative<IidSequence>(mode_)
                                                           ? StreamPurpose::ideal_augment
                                                           : StreamPurpose::real_augment)) {}

  LabeledBatch next() {
    const std::size_t b = config_.optimizer.batch_size;
    LabeledBatch out;
    if (std::holds_alternative<IidSequence>(mode_)) {
      out = sample(*config_.oracle, data_rng_, b);
    } else {
      const TrainSet& s = *finite_trainset(mode_);
      out.inputs = Matrix(b, s.inputs.cols());
      out.labels.resize(b);
      const bool shuffle = std::holds_alternative<EpochShuffleSequence>(mode_);
      for (std::size_t i = 0; i < b; ++i) {
        std::size_t idx;
        if (shuffle) {
          if (cursor_ == order_.size()) {
            order_ = data_rng_.permutation(s.size());
            cursor_ = 0;
          }
          idx = order_[cursor_++];
        } else {
          idx = data_rng_.below(s.size());
        }
        std::copy(s.inputs.row(idx).begin(), s.inputs.row(idx).end(), out.inputs.row(i).begin());
        out.labels[i] = s.labels[idx];
      }
    }
    augment_rows(out.inputs, config_.augmentation, aug_rng_);
    out.labels = encode_labels(info_, config_.model.head, std::move(out.labels));
    return out;
  }

 private:
  const WorldConfig& config_;
  SequenceMode mode_;
  LabelInfo info_;
  RngStream data_rng_;
  RngStream aug_rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// Head-encoded evaluation batch.
struct EvalSet {
  Matrix inputs;
  std::vector<double> labels;
};

inline EvalSet draw_eval_set(const DistributionOracle& oracle, const Head& head, std::size_t m,
                             std::uint64_t master_seed, StreamPurpose purpose = StreamPurpose::eval) {
  RngStream rng = RngStream::derive(master_seed, purpose);
  LabeledBatch b = sample(oracle, rng, m);
  return {std::move(b.inputs), encode_labels(oracle.label_info(), head, std::move(b.labels))};
}

namespace detail {

inline void training_step(const ModelSpec& model, const OptimizerSpec& opt, ModelParams& params,
                          OptimizerState& state, const Matrix& inputs, std::span<const double> labels,
                          double lr) {
  const LossAndGrad lg = loss_and_grad(model, params, inputs, labels);
  apply_update(opt, params, lg.grads, state, lr);
}

inline MetricsRecord make_record(const ModelSpec& model, const ModelParams& params, std::size_t step, double lr,
                                 const EvalSet& train_eval, const EvalSet& test_eval) {
  const EvalStats tr = evaluate(model, params, train_eval.inputs, train_eval.labels);
  const EvalStats te = evaluate(model, params, test_eval.inputs, test_eval.labels);
  MetricsRecord r;
  r.step = step;
  r.lr = lr;
  r.train_error = tr.error;
  r.train_soft_error = tr.soft_error;
  r.train_loss = tr.loss;
  r.test_error = te.error;
  r.test_soft_error = te.soft_error;
  r.test_loss = te.loss;
  return r;
}

}  // namespace detail

// Trains one world for config.total_steps steps, recording metrics at step 0,
// every eval_every steps, and at the final step. Training continues past the
// stopping time. A numerical failure ends the run early with `aborted` set.
inline Trajectory train_world(const WorldConfig& config, const SequenceMode& mode) {
  validate(config);
  const TrainSet* finite = finite_trainset(mode);
  if (!std::holds_alternative<IidSequence>(mode)) {
    if (!finite || finite->size() != config.n)
      throw ConfigError("finite sequence modes need a train set of size n", "n");
    if (finite->inputs.cols() != config.oracle->input_dim())
      throw ConfigError("train set dimension differs from oracle", "trainset");
  }

  const EvalSet test_eval = draw_eval_set(config.test_oracle(), config.model.head, config.eval_samples,
                                          config.master_seed);
  const EvalSet train_eval =
      finite ? EvalSet{finite->inputs, encode_labels(config.oracle->label_info(), config.model.head, finite->labels)}
             : draw_eval_set(*config.oracle, config.model.head, config.eval_samples, config.master_seed,
                             StreamPurpose::ideal_train_eval);

  const std::size_t total = config.total_steps;
  const auto lr_for = [&](std::size_t step) {
    return lr_at(config.optimizer.schedule, config.optimizer.base_lr, step, total);
  };

  Trajectory traj;
  ModelParams params = init_params(config.model, config.master_seed);
  OptimizerState state = make_state(config.optimizer, params);
  BatchSource source(config, mode);
  try {
    traj.records.push_back(detail::make_record(config.model, params, 0, lr_for(0), train_eval, test_eval));
    for (std::size_t step = 1; step <= total; ++step) {
      const LabeledBatch batch = source.next();
      detail::training_step(config.model, config.optimizer, params, state, batch.inputs, batch.labels,
                            lr_for(step - 1));
      if (step % config.eval_every == 0 || step == total)
        traj.records.push_back(detail::make_record(config.model, params, step, lr_for(step), train_eval, test_eval));
    }
  } catch (const NumericalAbort& e) {
    traj.aborted = true;
    traj.abort_reason = e.what();
  }
  traj.converged_step = stopping_time(traj, config.stop_threshold);
  return traj;
}

// The exact sequence of (augmented, head-encoded) samples train_world would
// consume under `mode`, concatenated in training order.
inline LabeledBatch generate_sequence(const WorldConfig& config, const SequenceMode& mode) {
  validate(config);
  BatchSource source(config, mode);
  const std::size_t b = config.optimizer.batch_size;
  LabeledBatch seq{Matrix(config.total_steps * b, config.oracle->input_dim()), {}};
  seq.labels.reserve(config.total_steps * b);
  for (std::size_t step = 0; step < config.total_steps; ++step) {
    const LabeledBatch batch = source.next();
    for (std::size_t i = 0; i < b; ++i) {
      std::copy(batch.inputs.row(i).begin(), batch.inputs.row(i).end(), seq.inputs.row(step * b + i).begin());
      seq.labels.push_back(batch.labels[i]);
    }
  }
  return seq;
}

// Test soft-error (w.r.t. eval_oracle) of the model obtained by training on
// `sequence` in order, batch_size samples per step. Labels in `sequence` are
// head-encoded. Parameters and the m-sample test set are derived from
// master_seed exactly as in train_world.
inline double evaluate_G(const ModelSpec& model, const OptimizerSpec& optimizer, const LabeledBatch& sequence,
                         const DistributionOracle& eval_oracle, std::size_t m, std::uint64_t master_seed) {
  validate(model);
  validate(optimizer);
  if (!is_softmax(model.head)) throw ConfigError("G is defined through soft-error; use a softmax head", "model.head");
  if (sequence.size() == 0) throw ShapeError("G needs a non-empty sequence");
  if (sequence.labels.size() != sequence.size()) throw ShapeError("sequence labels do not match inputs");
  const std::size_t b = optimizer.batch_size;
  if (sequence.size() % b != 0)
    throw ShapeError("sequence length " + std::to_string(sequence.size()) + " is not a multiple of batch size " +
                     std::to_string(b));
  const std::size_t steps = sequence.size() / b;
  ModelParams params = init_params(model, master_seed);
  OptimizerState state = make_state(optimizer, params);
  for (std::size_t step = 0; step < steps; ++step) {
    const Matrix inputs = sequence.inputs.slice_rows(step * b, b);
    const std::span<const double> labels(sequence.labels.data() + step * b, b);
    detail::training_step(model, optimizer, params, state, inputs, labels,
                          lr_at(optimizer.schedule, optimizer.base_lr, step, steps));
  }
  const EvalSet test_eval = draw_eval_set(eval_oracle, model.head, m, master_seed);
  return soft_error(model, params, test_eval.inputs, test_eval.labels);
}

struct CoupledReport {
  Trajectory real;
  Trajectory ideal;
  BootstrapReport report;
  bool aborted = false;
};

inline std::shared_ptr<const TrainSet> real_trainset(const WorldConfig& config) {
  if (config.trainset) return config.trainset;
  return std::make_shared<const TrainSet>(draw_trainset(*config.oracle, config.n, config.master_seed));
}

// Runs the Real World (finite train set) and the Ideal World (fresh samples)
// from the same initialization and evaluates both on the same test set.
inline CoupledReport run_coupled(const WorldConfig& config) {
  validate(config);
  const auto s = real_trainset(config);
  CoupledReport out;
  const SequenceMode real_mode = config.real_sampling == RealSampling::epoch_shuffle
                                     ? SequenceMode{EpochShuffleSequence{s}}
                                     : SequenceMode{WithReplacementSequence{s}};
  out.real = train_world(config, real_mode);
  out.ideal = train_world(config, IidSequence{});
  out.aborted = out.real.aborted || out.ideal.aborted;
  if (out.aborted) {
    const std::size_t common = std::min(out.real.records.size(), out.ideal.records.size());
    if (common == 0) return out;
    Trajectory r = out.real, i = out.ideal;
    r.records.resize(common);
    i.records.resize(common);
    out.report = bootstrap_report(r, i, config.stop_threshold);
  } else {
    out.report = bootstrap_report(out.real, out.ideal, config.stop_threshold);
  }
  return out;
}

}  // namespace deepboot
