#pragma once

// Linear-regression toy: x ~ N(0, V), y = act(<beta*, x>), linear model
// f(x) = <beta, x> trained by full-batch GD from beta = 0. The Real World
// descends the empirical TrainMSE; the Ideal World descends the population
// MSE, whose gradient is available in closed form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include "deepboot/distributions.hpp"
#include "deepboot/error.hpp"
#include "deepboot/matrix.hpp"

namespace deepboot::toy {

struct ToySetting {
  LabelActivation activation = LabelActivation::identity;
  std::size_t n = 20;
  std::size_t d = 1000;
  double eta = 0.1;
  std::size_t steps = 500;
  std::vector<std::uint64_t> seeds;
  // When > 0, the terminal TestMSE of every seed is also estimated on a fixed
  // Monte Carlo evaluation set of this size.
  std::size_t mc_eval_samples = 0;
};

inline std::vector<std::uint64_t> seed_range(std::size_t count) {
  std::vector<std::uint64_t> s(count);
  std::iota(s.begin(), s.end(), std::uint64_t{0});
  return s;
}

// Well-specified: identity labels, n = 20.
inline ToySetting setting_a() { return {LabelActivation::identity, 20, 1000, 0.1, 500, seed_range(20), 0}; }
// Misspecified: sign labels, n = 100.
inline ToySetting setting_b() { return {LabelActivation::sign, 100, 1000, 0.1, 500, seed_range(20), 0}; }

// E[x * sgn(<beta*, x>)] for x ~ N(0, V): sqrt(2/pi) V beta* / sqrt(beta*' V beta*).
inline std::vector<double> sign_cross_moment(const GaussianLinear& g) {
  double q = 0.0;
  for (std::size_t i = 0; i < g.beta_star.size(); ++i) q += g.cov_eigs[i] * g.beta_star[i] * g.beta_star[i];
  const double scale = std::sqrt(2.0 / std::numbers::pi) / std::sqrt(q);
  std::vector<double> c(g.beta_star.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = scale * g.cov_eigs[i] * g.beta_star[i];
  return c;
}

// beta - eta * (2/n) X^T (X beta - y)
inline std::vector<double> toy_real_step(std::span<const double> beta, const TrainSet& s, double eta) {
  if (beta.size() != s.inputs.cols() || s.labels.size() != s.size()) throw ShapeError("toy real step: shape mismatch");
  const double scale = 2.0 / static_cast<double>(s.size());
  std::vector<double> grad(beta.size(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = linalg::dot(s.inputs.row(i), beta) - s.labels[i];
    linalg::axpy(scale * r, s.inputs.row(i), grad);
  }
  std::vector<double> out(beta.begin(), beta.end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= eta * grad[j];
  return out;
}

// One GD step on the population MSE.
// identity: beta - 2 eta V (beta - beta*);  sign: beta - 2 eta (V beta - c).
inline std::vector<double> toy_ideal_step(std::span<const double> beta, const GaussianLinear& g, double eta) {
  if (beta.size() != g.beta_star.size()) throw ShapeError("toy ideal step: shape mismatch");
  std::vector<double> out(beta.begin(), beta.end());
  if (g.activation == LabelActivation::identity) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= 2.0 * eta * g.cov_eigs[j] * (beta[j] - g.beta_star[j]);
  } else {
    const auto c = sign_cross_moment(g);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= 2.0 * eta * (g.cov_eigs[j] * beta[j] - c[j]);
  }
  return out;
}

// Exact population MSE. identity: (beta - beta*)' V (beta - beta*);
// sign: beta' V beta - 2 beta' c + 1.
inline double population_test_mse(std::span<const double> beta, const GaussianLinear& g) {
  double s = 0.0;
  if (g.activation == LabelActivation::identity) {
    for (std::size_t j = 0; j < beta.size(); ++j) {
      const double r = beta[j] - g.beta_star[j];
      s += g.cov_eigs[j] * r * r;
    }
    return s;
  }
  const auto c = sign_cross_moment(g);
  for (std::size_t j = 0; j < beta.size(); ++j) s += g.cov_eigs[j] * beta[j] * beta[j] - 2.0 * beta[j] * c[j];
  return s + 1.0;
}

// (1/n) ||X beta - y||^2
inline double empirical_mse(std::span<const double> beta, const Matrix& inputs, std::span<const double> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    const double r = linalg::dot(inputs.row(i), beta) - labels[i];
    s += r * r;
  }
  return s / static_cast<double>(inputs.rows());
}

// Largest eigenvalue of the population covariance.
inline double lambda_max(const GaussianLinear& g) {
  return *std::max_element(g.cov_eigs.begin(), g.cov_eigs.end());
}

struct SeedCurves {
  std::uint64_t seed = 0;
  std::vector<double> real_train_mse;
  std::vector<double> real_test_mse;
  std::vector<double> ideal_test_mse;
  std::optional<double> real_test_mse_mc;   // terminal, Monte Carlo
  std::optional<double> ideal_test_mse_mc;  // terminal, Monte Carlo
};

struct ToyCurves {
  std::vector<SeedCurves> per_seed;
  std::vector<double> median_real_train_mse;
  std::vector<double> median_real_test_mse;
  std::vector<double> median_ideal_test_mse;

  // Medians over seeds of terminal |Real TestMSE - Ideal TestMSE| and of the
  // terminal Real TestMSE - TrainMSE.
  double median_terminal_bootstrap_gap() const;
  double median_terminal_generalization_gap() const;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw ShapeError("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline double ToyCurves::median_terminal_bootstrap_gap() const {
  std::vector<double> g;
  for (const auto& s : per_seed) g.push_back(std::abs(s.real_test_mse.back() - s.ideal_test_mse.back()));
  return median(std::move(g));
}

inline double ToyCurves::median_terminal_generalization_gap() const {
  std::vector<double> g;
  for (const auto& s : per_seed) g.push_back(s.real_test_mse.back() - s.real_train_mse.back());
  return median(std::move(g));
}

inline GaussianLinear gaussian_linear_of(const ToySetting& s) {
  return std::get<GaussianLinear>(make_gaussian_linear(s.d, s.activation).variant());
}

// Ideal World TestMSE at steps 0..steps (deterministic: beta_0 = 0). Iterates
// the residual to the population minimizer, delta <- (I - 2 eta V) delta,
// so small TestMSE values keep full relative precision.
// identity: minimizer beta*, TestMSE = delta' V delta;
// sign: minimizer V^-1 c, TestMSE = delta' V delta + 1 - c' V^-1 c.
inline std::vector<double> ideal_curve(const GaussianLinear& g, double eta, std::size_t steps) {
  const std::size_t d = g.beta_star.size();
  std::vector<double> delta(d);
  double offset = 0.0;
  if (g.activation == LabelActivation::identity) {
    for (std::size_t j = 0; j < d; ++j) delta[j] = -g.beta_star[j];
  } else {
    const auto c = sign_cross_moment(g);
    offset = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      delta[j] = -c[j] / g.cov_eigs[j];
      offset -= c[j] * c[j] / g.cov_eigs[j];
    }
  }
  const auto mse = [&] {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += g.cov_eigs[j] * delta[j] * delta[j];
    return s + offset;
  };
  std::vector<double> out{mse()};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t j = 0; j < d; ++j) delta[j] -= 2.0 * eta * g.cov_eigs[j] * delta[j];
    out.push_back(mse());
  }
  return out;
}

// Runs both worlds for every seed. Throws NumericalAbort when 2 * eta *
// lambda_max(V) >= 1 or a trajectory stops being finite.
inline ToyCurves run_toy(const ToySetting& setting) {
  if (setting.n == 0) throw ConfigError("n must be >= 1", "n");
  if (setting.seeds.empty()) throw ConfigError("at least one seed is required", "seeds");
  if (!(setting.eta > 0.0)) throw ConfigError("eta must be > 0", "eta");
  const DistributionOracle oracle = make_gaussian_linear(setting.d, setting.activation);
  const GaussianLinear& g = std::get<GaussianLinear>(oracle.variant());
  if (2.0 * setting.eta * lambda_max(g) >= 1.0)
    throw NumericalAbort("unstable step size: 2 * eta * lambda_max = " + std::to_string(2.0 * setting.eta * lambda_max(g)) +
                         " >= 1");

  const std::vector<double> ideal = ideal_curve(g, setting.eta, setting.steps);
  std::vector<double> ideal_beta(setting.d, 0.0);
  for (std::size_t t = 0; t < setting.steps; ++t) ideal_beta = toy_ideal_step(ideal_beta, g, setting.eta);

  ToyCurves curves;
  for (std::uint64_t seed : setting.seeds) {
    const TrainSet s = draw_trainset(oracle, setting.n, seed);
    SeedCurves sc;
    sc.seed = seed;
    sc.ideal_test_mse = ideal;
    std::vector<double> beta(setting.d, 0.0);
    sc.real_train_mse.push_back(empirical_mse(beta, s.inputs, s.labels));
    sc.real_test_mse.push_back(population_test_mse(beta, g));
    for (std::size_t t = 0; t < setting.steps; ++t) {
      beta = toy_real_step(beta, s, setting.eta);
      const double tr = empirical_mse(beta, s.inputs, s.labels);
      const double te = population_test_mse(beta, g);
      if (!std::isfinite(tr) || !std::isfinite(te))
        throw NumericalAbort("toy real world diverged at step " + std::to_string(t + 1));
      sc.real_train_mse.push_back(tr);
      sc.real_test_mse.push_back(te);
    }
    if (setting.mc_eval_samples > 0) {
      RngStream rng = RngStream::derive(seed, StreamPurpose::eval);
      const LabeledBatch ev = sample(oracle, rng, setting.mc_eval_samples);
      sc.real_test_mse_mc = empirical_mse(beta, ev.inputs, ev.labels);
      sc.ideal_test_mse_mc = empirical_mse(ideal_beta, ev.inputs, ev.labels);
    }
    curves.per_seed.push_back(std::move(sc));
  }

  const std::size_t len = setting.steps + 1;
  for (std::size_t t = 0; t < len; ++t) {
    std::vector<double> tr, te, id;
    for (const auto& sc : curves.per_seed) {
      tr.push_back(sc.real_train_mse[t]);
      te.push_back(sc.real_test_mse[t]);
      id.push_back(sc.ideal_test_mse[t]);
    }
    curves.median_real_train_mse.push_back(median(std::move(tr)));
    curves.median_real_test_mse.push_back(median(std::move(te)));
    curves.median_ideal_test_mse.push_back(median(std::move(id)));
  }
  return curves;
}

}  // namespace deepboot::toy
