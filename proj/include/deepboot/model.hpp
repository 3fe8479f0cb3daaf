#pragma once

// Dense MLP core: specs, parameters, forward pass, softmax / MSE heads, exact
// reverse-mode gradients and a finite-difference gradient checker.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "deepboot/error.hpp"
#include "deepboot/matrix.hpp"
#include "deepboot/rng.hpp"

namespace deepboot {

enum class Activation { relu, identity };

// Softmax cross-entropy over `classes` logits; labels are class indices.
struct SoftmaxXent {
  std::size_t classes = 2;
  friend bool operator==(const SoftmaxXent&, const SoftmaxXent&) = default;
};

// Squared error taken directly on the logits. With one output the labels are
// real targets; with k > 1 outputs the labels are class indices, one-hot encoded.
struct MseOnLogits {
  std::size_t outputs = 1;
  friend bool operator==(const MseOnLogits&, const MseOnLogits&) = default;
};

using Head = std::variant<SoftmaxXent, MseOnLogits>;

inline bool is_softmax(const Head& h) noexcept { return std::holds_alternative<SoftmaxXent>(h); }

inline std::size_t head_outputs(const Head& h) noexcept {
  return std::visit(
      [](const auto& x) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, SoftmaxXent>)
          return x.classes;
        else
          return x.outputs;
      },
      h);
}

struct ModelSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_widths;  // empty = linear model
  Activation activation = Activation::relu;
  Head head = SoftmaxXent{};
  bool bias = true;

  std::size_t output_dim() const noexcept { return head_outputs(head); }
  std::size_t layer_count() const noexcept { return hidden_widths.size() + 1; }

  // Widths of every layer boundary: input, hidden..., output.
  std::vector<std::size_t> dims() const {
    std::vector<std::size_t> d{input_dim};
    d.insert(d.end(), hidden_widths.begin(), hidden_widths.end());
    d.push_back(output_dim());
    return d;
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline void validate(const ModelSpec& spec) {
  if (spec.input_dim == 0) throw ConfigError("input_dim must be >= 1", "model.input_dim");
  for (std::size_t i = 0; i < spec.hidden_widths.size(); ++i)
    if (spec.hidden_widths[i] == 0)
      throw ConfigError("hidden width must be >= 1", "model.hidden[" + std::to_string(i) + "]");
  if (const auto* s = std::get_if<SoftmaxXent>(&spec.head); s && s->classes < 2)
    throw ConfigError("softmax head needs at least 2 classes", "model.head.classes");
  if (const auto* m = std::get_if<MseOnLogits>(&spec.head); m && m->outputs < 1)
    throw ConfigError("mse head needs at least 1 output", "model.head.outputs");
}

// One affine layer: weight is (out x in); bias has `out` entries, or is empty
// when the ModelSpec disables biases.
struct DenseLayer {
  Matrix weight;
  std::vector<double> bias;
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// A stack of per-layer tensors. ModelParams, Gradients and optimizer buffers
// all share this shape.
struct LayerTensors {
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }

  // Visit every scalar slot in a fixed order (layer by layer, weights then bias).
  template <typename F>
  void for_each(F&& f) {
    for (auto& l : layers) {
      for (double& w : l.weight.flat()) f(w);
      for (double& b : l.bias) f(b);
    }
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& l : layers) {
      for (double w : l.weight.flat()) f(w);
      for (double b : l.bias) f(b);
    }
  }

  // Reference to the i-th scalar in for_each order.
  double& at(std::size_t index) {
    for (auto& l : layers) {
      if (index < l.weight.size()) return l.weight.flat()[index];
      index -= l.weight.size();
      if (index < l.bias.size()) return l.bias[index];
      index -= l.bias.size();
    }
    throw ShapeError("parameter index out of range");
  }

  bool same_shape(const LayerTensors& other) const noexcept {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& a = layers[i];
      const auto& b = other.layers[i];
      if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
          a.bias.size() != b.bias.size())
        return false;
    }
    return true;
  }

  bool all_finite() const noexcept {
    bool ok = true;
    for_each([&](double v) { ok = ok && std::isfinite(v); });
    return ok;
  }

  // Zero-filled tensors with the same shape.
  LayerTensors zeros_like() const {
    LayerTensors z;
    for (const auto& l : layers)
      z.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()), std::vector<double>(l.bias.size())});
    return z;
  }

  friend bool operator==(const LayerTensors&, const LayerTensors&) = default;
};

struct ModelParams : LayerTensors {};
struct Gradients : LayerTensors {};

inline ModelParams zero_params(const ModelSpec& spec) {
  validate(spec);
  const auto d = spec.dims();
  ModelParams p;
  for (std::size_t l = 0; l + 1 < d.size(); ++l)
    p.layers.push_back({Matrix(d[l + 1], d[l]), std::vector<double>(spec.bias ? d[l + 1] : 0)});
  return p;
}

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero.
inline ModelParams init_params(const ModelSpec& spec, std::uint64_t seed) {
  ModelParams p = zero_params(spec);
  RngStream rng = RngStream::derive(seed, StreamPurpose::init);
  for (auto& layer : p.layers) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    for (double& w : layer.weight.flat()) w = rng.uniform(-scale, scale);
  }
  return p;
}

inline void check_params(const ModelSpec& spec, const ModelParams& params) {
  const auto d = spec.dims();
  if (params.layers.size() + 1 != d.size()) throw ShapeError("layer count does not match the model");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    if (layer.weight.rows() != d[l + 1] || layer.weight.cols() != d[l] ||
        layer.bias.size() != (spec.bias ? d[l + 1] : 0))
      throw ShapeError("layer " + std::to_string(l) + " shape does not match the model");
  }
}

namespace detail {

inline void add_bias(Matrix& z, const std::vector<double>& bias) {
  if (bias.empty()) return;
  for (std::size_t i = 0; i < z.rows(); ++i) linalg::axpy(1.0, bias, z.row(i));
}

inline void apply_activation(Matrix& z, Activation act) {
  if (act == Activation::identity) return;
  for (double& v : z.flat()) v = v > 0.0 ? v : 0.0;
}

// Intermediate values kept by the forward pass for backprop.
struct ForwardTape {
  std::vector<Matrix> inputs;  // inputs[l] is the input to layer l
  std::vector<Matrix> pre;     // pre-activations of hidden layers
  Matrix logits;
};

inline ForwardTape forward_tape(const ModelSpec& spec, const ModelParams& params, const Matrix& batch) {
  if (batch.cols() != spec.input_dim)
    throw ShapeError("batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                     std::to_string(spec.input_dim));
  check_params(spec, params);
  ForwardTape tape;
  Matrix a = batch;
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Matrix z = linalg::matmul_bt(a, params.layers[l].weight);
    add_bias(z, params.layers[l].bias);
    tape.inputs.push_back(std::move(a));
    if (l == last) {
      tape.logits = std::move(z);
    } else {
      tape.pre.push_back(z);
      apply_activation(z, spec.activation);
      a = std::move(z);
    }
  }
  return tape;
}

}  // namespace detail

// Logits (or predictions) for every row of `batch`.
inline Matrix forward(const ModelSpec& spec, const ModelParams& params, const Matrix& batch) {
  if (batch.cols() != spec.input_dim)
    throw ShapeError("batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                     std::to_string(spec.input_dim));
  check_params(spec, params);
  Matrix a = batch;
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Matrix z = linalg::matmul_bt(a, params.layers[l].weight);
    detail::add_bias(z, params.layers[l].bias);
    if (l != last) detail::apply_activation(z, spec.activation);
    a = std::move(z);
  }
  if (!a.all_finite()) throw NumericalAbort("forward produced non-finite outputs");
  return a;
}

// Numerically stable softmax (max-subtracted).
inline std::vector<double> softmax_probs(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    p[j] = std::exp(logits[j] - mx);
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

// log(sum(exp(logits))), stable.
inline double log_sum_exp(std::span<const double> logits) noexcept {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double v : logits) s += std::exp(v - mx);
  return mx + std::log(s);
}

// Label `y` as a class index in [0, k); throws when it is not one.
inline std::size_t class_index(double y, std::size_t k) {
  if (!(y >= 0.0) || y != std::floor(y) || y >= static_cast<double>(k))
    throw ShapeError("label " + std::to_string(y) + " is not a class index below " + std::to_string(k));
  return static_cast<std::size_t>(y);
}

struct LossAndGrad {
  double loss = 0.0;
  Gradients grads;
};

namespace detail {

// Mean loss over the batch and its gradient w.r.t. the logits.
inline double head_loss(const Head& head, const Matrix& logits, std::span<const double> labels,
                        Matrix* dlogits) {
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  if (dlogits) *dlogits = Matrix(n, k);
  if (is_softmax(head)) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto z = logits.row(i);
      const std::size_t y = class_index(labels[i], k);
      const double lse = log_sum_exp(z);
      total += lse - z[y];
      if (dlogits) {
        auto g = dlogits->row(i);
        for (std::size_t j = 0; j < k; ++j) g[j] = std::exp(z[j] - lse) * inv_n;
        g[y] -= inv_n;
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto z = logits.row(i);
      for (std::size_t j = 0; j < k; ++j) {
        double target;
        if (k == 1)
          target = labels[i];
        else
          target = class_index(labels[i], k) == j ? 1.0 : 0.0;
        const double r = z[j] - target;
        total += r * r;
        if (dlogits) (*dlogits)(i, j) = 2.0 * r * inv_n;
      }
    }
  }
  return total * inv_n;
}

inline void check_batch(const Matrix& batch, std::span<const double> labels) {
  if (batch.rows() == 0) throw ShapeError("empty batch");
  if (labels.size() != batch.rows())
    throw ShapeError("label count " + std::to_string(labels.size()) + " != batch rows " +
                     std::to_string(batch.rows()));
}

}  // namespace detail

// Mean loss over the batch.
inline double loss_value(const ModelSpec& spec, const ModelParams& params, const Matrix& batch,
                         std::span<const double> labels) {
  detail::check_batch(batch, labels);
  const Matrix logits = forward(spec, params, batch);
  return detail::head_loss(spec.head, logits, labels, nullptr);
}

// Mean loss over the batch and its exact gradient (reverse mode).
inline LossAndGrad loss_and_grad(const ModelSpec& spec, const ModelParams& params, const Matrix& batch,
                                 std::span<const double> labels) {
  detail::check_batch(batch, labels);
  auto tape = detail::forward_tape(spec, params, batch);
  Matrix delta;
  LossAndGrad out;
  out.loss = detail::head_loss(spec.head, tape.logits, labels, &delta);
  out.grads.layers.resize(params.layers.size());
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    auto& g = out.grads.layers[l];
    g.weight = linalg::matmul_at(delta, tape.inputs[l]);
    g.bias.assign(params.layers[l].bias.size(), 0.0);
    if (!g.bias.empty())
      for (std::size_t i = 0; i < delta.rows(); ++i) linalg::axpy(1.0, delta.row(i), g.bias);
    if (l == 0) break;
    Matrix prev = linalg::matmul(delta, params.layers[l].weight);
    if (spec.activation == Activation::relu) {
      const auto pre = tape.pre[l - 1].flat();
      auto pv = prev.flat();
      for (std::size_t j = 0; j < pv.size(); ++j)
        if (!(pre[j] > 0.0)) pv[j] = 0.0;
    }
    delta = std::move(prev);
  }
  if (!std::isfinite(out.loss)) throw NumericalAbort("loss is not finite");
  return out;
}

namespace detail {

// Sign pattern of every hidden pre-activation; used to spot ReLU kinks.
inline std::vector<bool> relu_pattern(const ModelSpec& spec, const ModelParams& params, const Matrix& batch) {
  std::vector<bool> bits;
  if (spec.activation != Activation::relu) return bits;
  const auto tape = forward_tape(spec, params, batch);
  for (const auto& z : tape.pre)
    for (double v : z.flat()) bits.push_back(v > 0.0);
  return bits;
}

}  // namespace detail

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  // Coordinates whose +/-eps probe crossed a ReLU kink (derivative undefined there).
  std::size_t skipped_kinks = 0;
};

// Compares the analytic gradient against central differences on a
// deterministic subsample of coordinates. Relative error per coordinate is
// |a - f| / max(|a|, |f|); coordinates where both are below 1e-12 count as 0.
inline GradCheckResult grad_check(const ModelSpec& spec, const ModelParams& params, const Matrix& batch,
                                  std::span<const double> labels, double eps = 1e-5,
                                  std::size_t min_coords = 128, std::uint64_t seed = 0) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw ConfigError("eps must lie in [1e-7, 1e-3]", "eps");
  const LossAndGrad analytic = loss_and_grad(spec, params, batch, labels);
  const std::vector<bool> base_pattern = detail::relu_pattern(spec, params, batch);

  const std::size_t total = params.parameter_count();
  RngStream rng = RngStream::derive(seed, StreamPurpose::generic, 0x6C);
  const auto order = rng.permutation(total);

  GradCheckResult result;
  ModelParams probe = params;
  Gradients grads = analytic.grads;
  for (std::size_t idx : order) {
    if (result.checked >= min_coords) break;
    double& slot = probe.at(idx);
    const double orig = slot;
    slot = orig + eps;
    const bool kink_hi = detail::relu_pattern(spec, probe, batch) != base_pattern;
    const double f_hi = loss_value(spec, probe, batch, labels);
    slot = orig - eps;
    const bool kink_lo = detail::relu_pattern(spec, probe, batch) != base_pattern;
    const double f_lo = loss_value(spec, probe, batch, labels);
    slot = orig;
    if (kink_hi || kink_lo) {
      ++result.skipped_kinks;
      continue;
    }
    const double fd = (f_hi - f_lo) / (2.0 * eps);
    const double a = grads.at(idx);
    const double denom = std::max(std::abs(a), std::abs(fd));
    const double rel = denom < 1e-12 ? 0.0 : std::abs(a - fd) / denom;
    result.max_relative_error = std::max(result.max_relative_error, rel);
    ++result.checked;
  }
  return result;
}

}  // namespace deepboot
