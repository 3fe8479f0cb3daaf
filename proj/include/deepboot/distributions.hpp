#pragma once

// Population oracles: unlimited i.i.d. sampling, finite train-set draws,
// teacher tasks, random labels, pool-backed resampling and augmentations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "deepboot/error.hpp"
#include "deepboot/matrix.hpp"
#include "deepboot/model.hpp"
#include "deepboot/rng.hpp"

namespace deepboot {

// How an oracle's labels are to be read.
struct LabelInfo {
  enum class Kind { real, sign, classes };
  Kind kind = Kind::real;
  std::size_t classes = 0;  // meaningful for Kind::classes

  friend bool operator==(const LabelInfo&, const LabelInfo&) = default;
};

struct LabeledBatch {
  Matrix inputs;
  std::vector<double> labels;

  std::size_t size() const noexcept { return inputs.rows(); }
  friend bool operator==(const LabeledBatch&, const LabeledBatch&) = default;
};

// n samples drawn once from an oracle.
struct TrainSet {
  Matrix inputs;
  std::vector<double> labels;
  std::uint64_t source_seed = 0;

  std::size_t size() const noexcept { return inputs.rows(); }
  friend bool operator==(const TrainSet&, const TrainSet&) = default;
};

enum class LabelActivation { identity, sign };

struct GaussianLinear {
  std::vector<double> beta_star;
  std::vector<double> cov_eigs;  // diagonal covariance
  LabelActivation activation = LabelActivation::identity;
};

struct GaussianGenerator {};

// Equal-weight mixture of unit-variance Gaussians around fixed centers.
struct MixtureGenerator {
  Matrix centers;  // (g x d)
};

using InputGenerator = std::variant<GaussianGenerator, MixtureGenerator>;

struct TeacherTask {
  std::size_t input_dim = 0;
  InputGenerator generator;
  ModelSpec teacher_spec;
  ModelParams teacher;
  std::uint64_t teacher_seed = 0;  // seed actually used after any reseeding
};

class DistributionOracle;

// Inputs from `base`, labels uniform over k classes independent of inputs.
struct RandomLabel {
  std::shared_ptr<const DistributionOracle> base;
  std::size_t classes = 10;
};

// Uniform draws with replacement from a finite pool.
struct PoolBacked {
  std::shared_ptr<const TrainSet> pool;
  LabelInfo labels;
};

class DistributionOracle {
 public:
  using Variant = std::variant<GaussianLinear, TeacherTask, RandomLabel, PoolBacked>;

  explicit DistributionOracle(Variant v) : v_(std::move(v)) { check(); }

  const Variant& variant() const noexcept { return v_; }

  std::size_t input_dim() const {
    return std::visit(
        [](const auto& o) -> std::size_t {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, GaussianLinear>)
            return o.beta_star.size();
          else if constexpr (std::is_same_v<T, TeacherTask>)
            return o.input_dim;
          else if constexpr (std::is_same_v<T, RandomLabel>)
            return o.base->input_dim();
          else
            return o.pool->inputs.cols();
        },
        v_);
  }

  LabelInfo label_info() const {
    return std::visit(
        [](const auto& o) -> LabelInfo {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, GaussianLinear>)
            return {o.activation == LabelActivation::sign ? LabelInfo::Kind::sign : LabelInfo::Kind::real, 0};
          else if constexpr (std::is_same_v<T, TeacherTask>)
            return {LabelInfo::Kind::classes, o.teacher_spec.output_dim()};
          else if constexpr (std::is_same_v<T, RandomLabel>)
            return {LabelInfo::Kind::classes, o.classes};
          else
            return o.labels;
        },
        v_);
  }

 private:
  void check() const {
    if (const auto* g = std::get_if<GaussianLinear>(&v_)) {
      if (g->beta_star.size() != g->cov_eigs.size() || g->beta_star.empty())
        throw ConfigError("beta_star and cov_eigs must have equal, nonzero length", "oracle");
      for (double e : g->cov_eigs)
        if (!(e > 0.0)) throw ConfigError("covariance eigenvalues must be > 0", "oracle.cov_eigs");
    } else if (const auto* t = std::get_if<TeacherTask>(&v_)) {
      validate(t->teacher_spec);
      if (!is_softmax(t->teacher_spec.head))
        throw ConfigError("teacher head must be softmax_xent", "oracle.teacher.head");
      if (t->teacher_spec.input_dim != t->input_dim)
        throw ConfigError("teacher input_dim differs from task input_dim", "oracle.teacher");
      check_params(t->teacher_spec, t->teacher);
      if (const auto* m = std::get_if<MixtureGenerator>(&t->generator);
          m && (m->centers.rows() == 0 || m->centers.cols() != t->input_dim))
        throw ConfigError("mixture centers must be (g x input_dim) with g >= 1", "oracle.generator");
    } else if (const auto* r = std::get_if<RandomLabel>(&v_)) {
      if (!r->base) throw ConfigError("random-label oracle needs a base oracle", "oracle.base");
      if (r->classes < 2) throw ConfigError("random-label oracle needs k >= 2", "oracle.classes");
    } else if (const auto* p = std::get_if<PoolBacked>(&v_)) {
      if (!p->pool || p->pool->size() == 0) throw ConfigError("pool must be non-empty", "oracle.pool");
    }
  }

  Variant v_;
};

namespace detail {

inline std::size_t argmax_row(std::span<const double> z) noexcept {
  std::size_t best = 0;
  for (std::size_t j = 1; j < z.size(); ++j)
    if (z[j] > z[best]) best = j;  // ties keep the lower index
  return best;
}

inline void generate_inputs(const InputGenerator& gen, std::size_t d, RngStream& rng, Matrix& out) {
  if (const auto* m = std::get_if<MixtureGenerator>(&gen)) {
    for (std::size_t i = 0; i < out.rows(); ++i) {
      const auto center = m->centers.row(rng.below(m->centers.rows()));
      auto row = out.row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] = center[j] + rng.normal();
    }
  } else {
    for (double& v : out.flat()) v = rng.normal();
  }
}

}  // namespace detail

// `count` i.i.d. draws; advances `rng`.
inline LabeledBatch sample(const DistributionOracle& oracle, RngStream& rng, std::size_t count) {
  if (count == 0) throw ShapeError("sample count must be >= 1");
  const std::size_t d = oracle.input_dim();
  LabeledBatch out{Matrix(count, d), std::vector<double>(count)};
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, GaussianLinear>) {
          std::vector<double> sd(d);
          for (std::size_t j = 0; j < d; ++j) sd[j] = std::sqrt(o.cov_eigs[j]);
          for (std::size_t i = 0; i < count; ++i) {
            auto row = out.inputs.row(i);
            for (std::size_t j = 0; j < d; ++j) row[j] = sd[j] * rng.normal();
            const double s = linalg::dot(o.beta_star, row);
            out.labels[i] = o.activation == LabelActivation::sign ? (s >= 0.0 ? 1.0 : -1.0) : s;
          }
        } else if constexpr (std::is_same_v<T, TeacherTask>) {
          detail::generate_inputs(o.generator, d, rng, out.inputs);
          const Matrix logits = forward(o.teacher_spec, o.teacher, out.inputs);
          for (std::size_t i = 0; i < count; ++i)
            out.labels[i] = static_cast<double>(detail::argmax_row(logits.row(i)));
        } else if constexpr (std::is_same_v<T, RandomLabel>) {
          RngStream label_rng = rng.split(rng.next_u64());
          out = sample(*o.base, rng, count);
          for (double& y : out.labels) y = static_cast<double>(label_rng.below(o.classes));
        } else {
          const TrainSet& pool = *o.pool;
          for (std::size_t i = 0; i < count; ++i) {
            const std::size_t idx = rng.below(pool.size());
            std::copy(pool.inputs.row(idx).begin(), pool.inputs.row(idx).end(), out.inputs.row(i).begin());
            out.labels[i] = pool.labels[idx];
          }
        }
      },
      oracle.variant());
  return out;
}

// n samples, deterministic in (oracle, n, seed). Uses the trainset stream so
// it never overlaps training or evaluation draws made from the same seed.
inline TrainSet draw_trainset(const DistributionOracle& oracle, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("train set size must be >= 1", "n");
  RngStream rng = RngStream::derive(seed, StreamPurpose::trainset);
  LabeledBatch b = sample(oracle, rng, n);
  return TrainSet{std::move(b.inputs), std::move(b.labels), seed};
}

// x ~ N(0, V) with V = diag(1 x10, 0.1 x (d-10)); beta* = e1.
inline DistributionOracle make_gaussian_linear(std::size_t d, LabelActivation activation) {
  if (d < 11) throw ConfigError("gaussian-linear oracle needs d >= 11", "oracle.dim");
  GaussianLinear g;
  g.beta_star.assign(d, 0.0);
  g.beta_star[0] = 1.0;
  g.cov_eigs.assign(d, 0.1);
  std::fill(g.cov_eigs.begin(), g.cov_eigs.begin() + 10, 1.0);
  g.activation = activation;
  return DistributionOracle(std::move(g));
}

inline MixtureGenerator make_mixture(std::size_t components, std::size_t d, double center_scale,
                                     std::uint64_t seed) {
  if (components == 0) throw ConfigError("mixture needs >= 1 component", "oracle.generator.components");
  RngStream rng = RngStream::derive(seed, StreamPurpose::teacher, 0xC0);
  MixtureGenerator m{Matrix(components, d)};
  for (double& v : m.centers.flat()) v = center_scale * rng.normal();
  return m;
}

// Class frequencies of `task` estimated on `draws` samples.
inline std::vector<double> class_frequencies(const DistributionOracle& task, std::size_t draws,
                                             std::uint64_t seed) {
  const LabelInfo info = task.label_info();
  std::vector<double> freq(info.classes, 0.0);
  RngStream rng = RngStream::derive(seed, StreamPurpose::generic, 0xF2);
  const LabeledBatch b = sample(task, rng, draws);
  for (double y : b.labels) freq[class_index(y, info.classes)] += 1.0;
  for (double& f : freq) f /= static_cast<double>(draws);
  return freq;
}

// Generator + frozen teacher. A freshly initialized teacher whose label
// distribution is degenerate (some class below 0.1/k or above 1 - 0.1/k over
// 10^4 draws) is re-drawn from the next seed.
inline DistributionOracle make_teacher_task(std::size_t input_dim, ModelSpec teacher_spec, std::uint64_t seed,
                                            InputGenerator generator = GaussianGenerator{},
                                            int max_reseeds = 64) {
  teacher_spec.input_dim = input_dim;
  validate(teacher_spec);
  if (!is_softmax(teacher_spec.head))
    throw ConfigError("teacher head must be softmax_xent", "oracle.teacher.head");
  const std::size_t k = teacher_spec.output_dim();
  for (int attempt = 0; attempt < max_reseeds; ++attempt) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
    TeacherTask t{input_dim, generator, teacher_spec,
                  init_params(teacher_spec, RngStream::derive(s, StreamPurpose::teacher).next_u64()), s};
    DistributionOracle oracle(std::move(t));
    const auto freq = class_frequencies(oracle, 10000, s);
    const double lo = 0.1 / static_cast<double>(k);
    const bool balanced =
        std::all_of(freq.begin(), freq.end(), [&](double f) { return f > lo && f < 1.0 - lo; });
    if (balanced) return oracle;
  }
  throw ConfigError("could not find a non-degenerate teacher", "oracle.teacher");
}

inline DistributionOracle make_random_label(DistributionOracle base, std::size_t classes) {
  return DistributionOracle(RandomLabel{std::make_shared<const DistributionOracle>(std::move(base)), classes});
}

inline DistributionOracle make_pool_backed(TrainSet pool, LabelInfo labels) {
  return DistributionOracle(PoolBacked{std::make_shared<const TrainSet>(std::move(pool)), labels});
}

// ---- augmentation ----

struct NoAugmentation {
  friend bool operator==(const NoAugmentation&, const NoAugmentation&) = default;
};
struct GaussianNoise {
  double sigma = 0.0;
  friend bool operator==(const GaussianNoise&, const GaussianNoise&) = default;
};
struct CoordDropout {
  double p = 0.0;
  friend bool operator==(const CoordDropout&, const CoordDropout&) = default;
};

using Augmentation = std::variant<NoAugmentation, GaussianNoise, CoordDropout>;

inline void validate(const Augmentation& aug) {
  if (const auto* g = std::get_if<GaussianNoise>(&aug); g && !(g->sigma >= 0.0 && std::isfinite(g->sigma)))
    throw ConfigError("sigma must be >= 0", "augmentation.sigma");
  if (const auto* c = std::get_if<CoordDropout>(&aug); c && !(c->p >= 0.0 && c->p < 1.0))
    throw ConfigError("dropout p must lie in [0, 1)", "augmentation.p");
}

inline bool is_identity(const Augmentation& aug) noexcept {
  if (std::holds_alternative<NoAugmentation>(aug)) return true;
  if (const auto* g = std::get_if<GaussianNoise>(&aug)) return g->sigma == 0.0;
  return std::get<CoordDropout>(aug).p == 0.0;
}

inline void augment_in_place(std::span<double> x, const Augmentation& aug, RngStream& rng) {
  if (is_identity(aug)) return;
  if (const auto* g = std::get_if<GaussianNoise>(&aug)) {
    for (double& v : x) v += g->sigma * rng.normal();
  } else if (const auto* c = std::get_if<CoordDropout>(&aug)) {
    for (double& v : x)
      if (rng.bernoulli(c->p)) v = 0.0;
  }
}

inline std::vector<double> augment(std::span<const double> x, const Augmentation& aug, RngStream& rng) {
  validate(aug);
  std::vector<double> out(x.begin(), x.end());
  augment_in_place(out, aug, rng);
  return out;
}

inline void augment_rows(Matrix& inputs, const Augmentation& aug, RngStream& rng) {
  if (is_identity(aug)) return;
  for (std::size_t i = 0; i < inputs.rows(); ++i) augment_in_place(inputs.row(i), aug, rng);
}

}  // namespace deepboot
