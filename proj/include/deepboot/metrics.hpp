#pragma once

// Evaluation statistics (soft-error, hard error, loss, MSE), per-step metric
// records, trajectories and the Real-vs-Ideal bootstrap-gap report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deepboot/error.hpp"
#include "deepboot/matrix.hpp"
#include "deepboot/model.hpp"

namespace deepboot {

struct EvalStats {
  double error = 0.0;
  std::optional<double> soft_error;  // absent for mse heads
  double loss = 0.0;                 // cross-entropy, or mean squared error on mse heads
};

namespace detail {

inline constexpr std::size_t kEvalChunk = 4096;

inline bool sign_decoded_error(double pred, double target) noexcept {
  return (pred > 0.0) != (target > 0.0);
}

}  // namespace detail

// One pass over the evaluation set, in fixed-size chunks and fixed order.
inline EvalStats evaluate(const ModelSpec& spec, const ModelParams& params, const Matrix& inputs,
                          std::span<const double> labels) {
  if (inputs.rows() == 0) throw ShapeError("empty evaluation set");
  if (labels.size() != inputs.rows()) throw ShapeError("label count does not match evaluation rows");
  const std::size_t n = inputs.rows();
  const std::size_t k = spec.output_dim();
  const bool softmax = is_softmax(spec.head);
  double err = 0.0, soft = 0.0, loss = 0.0;
  for (std::size_t begin = 0; begin < n; begin += detail::kEvalChunk) {
    const std::size_t count = std::min(detail::kEvalChunk, n - begin);
    const Matrix logits = forward(spec, params, inputs.slice_rows(begin, count));
    for (std::size_t r = 0; r < count; ++r) {
      const auto z = logits.row(r);
      const double y = labels[begin + r];
      if (softmax) {
        const std::size_t cls = class_index(y, k);
        const double lse = log_sum_exp(z);
        const double p = std::exp(z[cls] - lse);
        soft += 1.0 - p;
        loss += lse - z[cls];
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
          if (z[j] > z[best]) best = j;
        err += best != cls ? 1.0 : 0.0;
      } else if (k == 1) {
        const double r2 = z[0] - y;
        loss += r2 * r2;
        err += detail::sign_decoded_error(z[0], y) ? 1.0 : 0.0;
      } else {
        const std::size_t cls = class_index(y, k);
        std::size_t best = 0;
        for (std::size_t j = 0; j < k; ++j) {
          const double t = j == cls ? 1.0 : 0.0;
          loss += (z[j] - t) * (z[j] - t);
          if (z[j] > z[best]) best = j;
        }
        err += best != cls ? 1.0 : 0.0;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  EvalStats s;
  s.error = err * inv;
  s.loss = loss * inv;
  if (softmax) s.soft_error = std::clamp(soft * inv, 0.0, 1.0);
  if (!std::isfinite(s.loss)) throw NumericalAbort("evaluation loss is not finite");
  return s;
}

// Mean of (1 - softmax probability on the true class).
inline double soft_error(const ModelSpec& spec, const ModelParams& params, const Matrix& inputs,
                         std::span<const double> labels) {
  if (!is_softmax(spec.head)) throw ConfigError("soft-error is undefined for an mse head", "model.head");
  return *evaluate(spec, params, inputs, labels).soft_error;
}

// Argmax mismatch rate (ties go to the lower class); single-output mse heads
// are decoded by sign against +/-1 targets.
inline double hard_error(const ModelSpec& spec, const ModelParams& params, const Matrix& inputs,
                         std::span<const double> labels) {
  return evaluate(spec, params, inputs, labels).error;
}

inline double test_mse(const ModelSpec& spec, const ModelParams& params, const Matrix& inputs,
                       std::span<const double> targets) {
  if (is_softmax(spec.head)) throw ConfigError("test_mse needs an mse head", "model.head");
  return evaluate(spec, params, inputs, targets).loss;
}

struct MetricsRecord {
  std::size_t step = 0;
  double lr = 0.0;
  double train_error = 0.0;
  std::optional<double> train_soft_error;
  double train_loss = 0.0;
  double test_error = 0.0;
  std::optional<double> test_soft_error;
  double test_loss = 0.0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

struct Trajectory {
  std::vector<MetricsRecord> records;
  std::optional<std::size_t> converged_step;
  bool aborted = false;
  std::string abort_reason;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("stop threshold must lie in (0, 1)", "stop_threshold");
}

// First recorded step whose train error is below `threshold`.
inline std::optional<std::size_t> stopping_time(const Trajectory& traj, double threshold = 0.01) {
  check_threshold(threshold);
  for (const auto& r : traj.records)
    if (r.train_error < threshold) return r.step;
  return std::nullopt;
}

// The quantity the gap is measured in: soft-error when recorded, otherwise
// hard error (mse heads).
inline double gap_metric(const MetricsRecord& r) noexcept {
  return r.test_soft_error ? *r.test_soft_error : r.test_error;
}
inline double train_gap_metric(const MetricsRecord& r) noexcept {
  return r.train_soft_error ? *r.train_soft_error : r.train_error;
}

struct BootstrapReport {
  std::vector<std::pair<std::size_t, double>> eps_series;
  std::optional<std::size_t> t0;
  std::size_t report_step = 0;  // t0, or the final step when t0 is absent
  bool t0_fallback = false;     // true when report_step is the final step
  double eps_at_t0 = 0.0;
  double max_abs_eps_pre_t0 = 0.0;
  double gen_gap_at_t0 = 0.0;   // real test - real train, same units as eps

  friend bool operator==(const BootstrapReport&, const BootstrapReport&) = default;
};

inline BootstrapReport bootstrap_report(const Trajectory& real, const Trajectory& ideal,
                                        double stop_threshold = 0.01) {
  if (real.records.size() != ideal.records.size() || real.records.empty())
    throw ShapeError("real and ideal trajectories have different evaluation grids");
  BootstrapReport rep;
  rep.t0 = stopping_time(real, stop_threshold);
  for (std::size_t i = 0; i < real.records.size(); ++i) {
    const auto& r = real.records[i];
    const auto& d = ideal.records[i];
    if (r.step != d.step) throw ShapeError("real and ideal trajectories have different evaluation grids");
    rep.eps_series.emplace_back(r.step, gap_metric(r) - gap_metric(d));
  }
  rep.t0_fallback = !rep.t0.has_value();
  rep.report_step = rep.t0 ? *rep.t0 : real.records.back().step;
  for (std::size_t i = 0; i < rep.eps_series.size(); ++i) {
    const auto [step, eps] = rep.eps_series[i];
    if (step > rep.report_step) break;
    rep.max_abs_eps_pre_t0 = std::max(rep.max_abs_eps_pre_t0, std::abs(eps));
    if (step == rep.report_step) {
      rep.eps_at_t0 = eps;
      rep.gen_gap_at_t0 = gap_metric(real.records[i]) - train_gap_metric(real.records[i]);
    }
  }
  return rep;
}

}  // namespace deepboot
