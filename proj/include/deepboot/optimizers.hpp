#pragma once

// Optimizer state machines (GD, SGD with momentum, Adam) and learning-rate
// schedules (constant, cosine decay, step drop).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "deepboot/error.hpp"
#include "deepboot/model.hpp"

namespace deepboot {

struct ConstantLr {
  friend bool operator==(const ConstantLr&, const ConstantLr&) = default;
};

// base * (1 + cos(pi * step / horizon)) / 2. A zero `total_steps` means the
// horizon is the run length.
struct CosineDecay {
  std::size_t total_steps = 0;
  friend bool operator==(const CosineDecay&, const CosineDecay&) = default;
};

// base * drop_factor^(number of milestones passed); milestones are fractions
// of the run length, a milestone counts as passed once step >= m * total.
struct StepDrop {
  double drop_factor = 0.1;
  std::vector<double> milestones{1.0 / 3.0, 2.0 / 3.0};
  friend bool operator==(const StepDrop&, const StepDrop&) = default;
};

using Schedule = std::variant<ConstantLr, CosineDecay, StepDrop>;

struct PlainGd {
  friend bool operator==(const PlainGd&, const PlainGd&) = default;
};
struct Sgd {
  double momentum = 0.0;
  friend bool operator==(const Sgd&, const Sgd&) = default;
};
struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  friend bool operator==(const Adam&, const Adam&) = default;
};

using OptimizerKind = std::variant<PlainGd, Sgd, Adam>;

struct OptimizerSpec {
  OptimizerKind kind = Sgd{};
  double base_lr = 0.1;
  Schedule schedule = ConstantLr{};
  std::size_t batch_size = 128;

  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;
};

// Adam with the usual defaults (lr 1e-3, betas 0.9 / 0.999).
inline OptimizerSpec adam_defaults(std::size_t batch_size = 128) {
  return OptimizerSpec{Adam{}, 0.001, ConstantLr{}, batch_size};
}

inline void validate(const Schedule& s) {
  if (const auto* c = std::get_if<CosineDecay>(&s); c) return;
  if (const auto* d = std::get_if<StepDrop>(&s)) {
    if (!(d->drop_factor > 0.0)) throw ConfigError("drop_factor must be > 0", "optimizer.schedule.drop_factor");
    double prev = 0.0;
    for (double m : d->milestones) {
      if (!(m > prev && m < 1.0))
        throw ConfigError("milestones must be strictly increasing in (0, 1)", "optimizer.schedule.milestones");
      prev = m;
    }
  }
}

inline void validate(const OptimizerSpec& o) {
  if (!(o.base_lr > 0.0) || !std::isfinite(o.base_lr)) throw ConfigError("base_lr must be > 0", "optimizer.lr");
  if (o.batch_size < 1) throw ConfigError("batch_size must be >= 1", "optimizer.batch_size");
  if (const auto* s = std::get_if<Sgd>(&o.kind); s && !(s->momentum >= 0.0 && s->momentum < 1.0))
    throw ConfigError("momentum must lie in [0, 1)", "optimizer.momentum");
  if (const auto* a = std::get_if<Adam>(&o.kind)) {
    if (!(a->beta1 >= 0.0 && a->beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)", "optimizer.beta1");
    if (!(a->beta2 >= 0.0 && a->beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)", "optimizer.beta2");
    if (!(a->eps > 0.0)) throw ConfigError("eps must be > 0", "optimizer.eps");
  }
  validate(o.schedule);
}

inline double lr_at(const Schedule& schedule, double base_lr, std::size_t step, std::size_t total_steps) {
  if (step > total_steps)
    throw ConfigError("step " + std::to_string(step) + " beyond total_steps " + std::to_string(total_steps),
                      "schedule");
  if (std::holds_alternative<ConstantLr>(schedule)) return base_lr;
  if (const auto* c = std::get_if<CosineDecay>(&schedule)) {
    const std::size_t horizon = c->total_steps ? c->total_steps : total_steps;
    if (horizon == 0) return base_lr;
    if (step >= horizon) return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi));
    const double frac = static_cast<double>(step) / static_cast<double>(horizon);
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
  }
  const auto& d = std::get<StepDrop>(schedule);
  double lr = base_lr;
  for (double m : d.milestones)
    if (static_cast<double>(step) >= m * static_cast<double>(total_steps)) lr *= d.drop_factor;
  return lr;
}

struct OptimizerState {
  LayerTensors velocity;      // sgd / gd momentum buffer
  LayerTensors first_moment;  // adam
  LayerTensors second_moment; // adam
  std::uint64_t step_count = 0;
};

inline OptimizerState make_state(const OptimizerSpec& spec, const ModelParams& params) {
  OptimizerState s;
  if (std::holds_alternative<Sgd>(spec.kind)) s.velocity = params.zeros_like();
  if (std::holds_alternative<Adam>(spec.kind)) {
    s.first_moment = params.zeros_like();
    s.second_moment = params.zeros_like();
  }
  return s;
}

// One optimizer step in place. gd/sgd: v <- mu*v + g; theta <- theta - lr*v.
// adam: bias-corrected moments. Non-finite gradients abort.
inline void apply_update(const OptimizerSpec& spec, ModelParams& params, const Gradients& grads,
                         OptimizerState& state, double lr) {
  if (!params.same_shape(grads)) throw ShapeError("gradients do not match parameter shapes");
  if (!grads.all_finite()) throw NumericalAbort("non-finite gradient at optimizer step " +
                                                std::to_string(state.step_count + 1));
  std::vector<double*> theta;
  theta.reserve(params.parameter_count());
  params.for_each([&](double& v) { theta.push_back(&v); });
  std::vector<double> g;
  g.reserve(theta.size());
  grads.for_each([&](double v) { g.push_back(v); });

  if (std::holds_alternative<PlainGd>(spec.kind)) {
    for (std::size_t i = 0; i < theta.size(); ++i) *theta[i] -= lr * g[i];
  } else if (const auto* sgd = std::get_if<Sgd>(&spec.kind)) {
    if (!state.velocity.same_shape(params)) throw ShapeError("momentum buffer does not match parameters");
    std::size_t i = 0;
    state.velocity.for_each([&](double& v) {
      v = sgd->momentum * v + g[i];
      *theta[i] -= lr * v;
      ++i;
    });
  } else {
    const auto& a = std::get<Adam>(spec.kind);
    if (!state.first_moment.same_shape(params) || !state.second_moment.same_shape(params))
      throw ShapeError("adam moments do not match parameters");
    const double t = static_cast<double>(state.step_count + 1);
    const double c1 = 1.0 - std::pow(a.beta1, t);
    const double c2 = 1.0 - std::pow(a.beta2, t);
    std::vector<double*> m;
    state.first_moment.for_each([&](double& v) { m.push_back(&v); });
    std::size_t i = 0;
    state.second_moment.for_each([&](double& v) {
      double& mi = *m[i];
      mi = a.beta1 * mi + (1.0 - a.beta1) * g[i];
      v = a.beta2 * v + (1.0 - a.beta2) * g[i] * g[i];
      *theta[i] -= lr * (mi / c1) / (std::sqrt(v / c2) + a.eps);
      ++i;
    });
  }
  ++state.step_count;
  if (!params.all_finite()) throw NumericalAbort("parameters became non-finite");
}

}  // namespace deepboot
