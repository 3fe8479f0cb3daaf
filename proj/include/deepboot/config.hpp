#pragma once

// Experiment configuration file: JSON, schema-versioned, strictly validated
// (unknown keys are rejected with their path). parse_config(emit_config(c))
// reproduces c exactly.

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"  // nlohmann/json (vendor/)

#include "deepboot/distributions.hpp"
#include "deepboot/error.hpp"
#include "deepboot/model.hpp"
#include "deepboot/optimizers.hpp"
#include "deepboot/worlds.hpp"

namespace deepboot {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---- declarative oracle description ----

struct OracleConfig;

struct GaussianLinearConfig {
  std::size_t dim = 1000;
  LabelActivation activation = LabelActivation::identity;
  friend bool operator==(const GaussianLinearConfig&, const GaussianLinearConfig&) = default;
};

struct TeacherConfig {
  std::size_t input_dim = 64;
  std::size_t mixture_components = 0;  // 0 = single standard Gaussian
  double center_scale = 2.0;
  std::vector<std::size_t> hidden{64};
  Activation activation = Activation::relu;
  std::size_t classes = 2;
  std::uint64_t seed = 0;
  friend bool operator==(const TeacherConfig&, const TeacherConfig&) = default;
};

struct RandomLabelConfig {
  std::size_t classes = 10;
  std::shared_ptr<const OracleConfig> base;
  friend bool operator==(const RandomLabelConfig& a, const RandomLabelConfig& b);
};

struct PoolConfig {
  std::size_t size = 0;
  std::uint64_t seed = 0;
  std::shared_ptr<const OracleConfig> base;
  friend bool operator==(const PoolConfig& a, const PoolConfig& b);
};

struct OracleConfig {
  std::variant<GaussianLinearConfig, TeacherConfig, RandomLabelConfig, PoolConfig> v;
  friend bool operator==(const OracleConfig&, const OracleConfig&) = default;
};

inline bool deep_equal(const std::shared_ptr<const OracleConfig>& a, const std::shared_ptr<const OracleConfig>& b) {
  if (!a || !b) return !a && !b;
  return *a == *b;
}
inline bool operator==(const RandomLabelConfig& a, const RandomLabelConfig& b) {
  return a.classes == b.classes && deep_equal(a.base, b.base);
}
inline bool operator==(const PoolConfig& a, const PoolConfig& b) {
  return a.size == b.size && a.seed == b.seed && deep_equal(a.base, b.base);
}

inline DistributionOracle build_oracle(const OracleConfig& c) {
  return std::visit(
      [](const auto& o) -> DistributionOracle {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, GaussianLinearConfig>) {
          return make_gaussian_linear(o.dim, o.activation);
        } else if constexpr (std::is_same_v<T, TeacherConfig>) {
          ModelSpec spec{o.input_dim, o.hidden, o.activation, SoftmaxXent{o.classes}, true};
          InputGenerator gen = GaussianGenerator{};
          if (o.mixture_components > 0) gen = make_mixture(o.mixture_components, o.input_dim, o.center_scale, o.seed);
          return make_teacher_task(o.input_dim, spec, o.seed, gen);
        } else if constexpr (std::is_same_v<T, RandomLabelConfig>) {
          return make_random_label(build_oracle(*o.base), o.classes);
        } else {
          const DistributionOracle base = build_oracle(*o.base);
          RngStream rng = RngStream::derive(o.seed, StreamPurpose::pool);
          LabeledBatch b = sample(base, rng, o.size);
          return make_pool_backed(TrainSet{std::move(b.inputs), std::move(b.labels), o.seed}, base.label_info());
        }
      },
      c.v);
}

// ---- experiment ----

struct SweepAxes {
  std::vector<std::size_t> n;
  std::vector<double> lr;
  std::vector<Augmentation> augmentation;
  std::vector<OptimizerKind> optimizer;
  friend bool operator==(const SweepAxes&, const SweepAxes&) = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  OracleConfig oracle;
  std::optional<OracleConfig> eval_oracle;
  std::size_t n = 1000;
  ModelSpec model;  // input_dim is taken from the oracle
  OptimizerSpec optimizer;
  std::size_t steps = 1000;
  std::size_t eval_every = 100;
  std::size_t eval_samples = 10000;
  double stop_threshold = 0.01;
  Augmentation augmentation = NoAugmentation{};
  RealSampling real_sampling = RealSampling::epoch_shuffle;
  std::vector<std::uint64_t> seeds;
  SweepAxes sweep;
  std::string output_dir = "runs";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ---- JSON reading with path tracking ----

namespace detail {

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("expected an object", path_.empty() ? "<root>" : path_);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& required(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing required field", child(key));
    return j_.at(key);
  }
  const json* optional(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  // Every key in the object must have been consumed.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key", child(it.key()));
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::size_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError("expected a non-negative integer", path);
  return j.get<std::size_t>();
}
inline std::uint64_t as_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError("expected a non-negative integer", path);
  return j.get<std::uint64_t>();
}
inline double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("expected a number", path);
  return j.get<double>();
}
inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError("expected a string", path);
  return j.get<std::string>();
}
inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError("expected a boolean", path);
  return j.get<bool>();
}
inline const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("expected an array", path);
  return j;
}
inline std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline std::vector<std::size_t> count_list(const json& j, const std::string& path) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < as_array(j, path).size(); ++i) out.push_back(as_count(j[i], idx(path, i)));
  return out;
}

inline Activation parse_activation(const json& j, const std::string& path) {
  const auto s = as_string(j, path);
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw ConfigError("expected \"relu\" or \"identity\"", path);
}
inline const char* activation_name(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

inline LabelActivation parse_label_activation(const json& j, const std::string& path) {
  const auto s = as_string(j, path);
  if (s == "identity") return LabelActivation::identity;
  if (s == "sign") return LabelActivation::sign;
  throw ConfigError("expected \"identity\" or \"sign\"", path);
}
inline const char* label_activation_name(LabelActivation a) {
  return a == LabelActivation::sign ? "sign" : "identity";
}

inline OracleConfig parse_oracle(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = as_string(r.required("kind"), r.child("kind"));
  OracleConfig out;
  if (kind == "gaussian_linear") {
    GaussianLinearConfig g;
    if (const auto* v = r.optional("dim")) g.dim = as_count(*v, r.child("dim"));
    if (const auto* v = r.optional("activation")) g.activation = parse_label_activation(*v, r.child("activation"));
    out.v = g;
  } else if (kind == "teacher") {
    TeacherConfig t;
    t.input_dim = as_count(r.required("input_dim"), r.child("input_dim"));
    if (const auto* v = r.optional("mixture_components")) t.mixture_components = as_count(*v, r.child("mixture_components"));
    if (const auto* v = r.optional("center_scale")) t.center_scale = as_double(*v, r.child("center_scale"));
    if (const auto* v = r.optional("hidden")) t.hidden = count_list(*v, r.child("hidden"));
    if (const auto* v = r.optional("activation")) t.activation = parse_activation(*v, r.child("activation"));
    if (const auto* v = r.optional("classes")) t.classes = as_count(*v, r.child("classes"));
    if (const auto* v = r.optional("seed")) t.seed = as_u64(*v, r.child("seed"));
    out.v = t;
  } else if (kind == "random_label") {
    RandomLabelConfig rl;
    if (const auto* v = r.optional("classes")) rl.classes = as_count(*v, r.child("classes"));
    rl.base = std::make_shared<const OracleConfig>(parse_oracle(r.required("base"), r.child("base")));
    out.v = rl;
  } else if (kind == "pool") {
    PoolConfig p;
    p.size = as_count(r.required("size"), r.child("size"));
    if (const auto* v = r.optional("seed")) p.seed = as_u64(*v, r.child("seed"));
    p.base = std::make_shared<const OracleConfig>(parse_oracle(r.required("base"), r.child("base")));
    out.v = p;
  } else {
    throw ConfigError("unknown oracle kind \"" + kind + "\"", r.child("kind"));
  }
  r.finish();
  return out;
}

inline json emit_oracle(const OracleConfig& c) {
  return std::visit(
      [](const auto& o) -> json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, GaussianLinearConfig>) {
          return {{"kind", "gaussian_linear"}, {"dim", o.dim}, {"activation", label_activation_name(o.activation)}};
        } else if constexpr (std::is_same_v<T, TeacherConfig>) {
          return {{"kind", "teacher"},          {"input_dim", o.input_dim},
                  {"mixture_components", o.mixture_components}, {"center_scale", o.center_scale},
                  {"hidden", o.hidden},         {"activation", activation_name(o.activation)},
                  {"classes", o.classes},       {"seed", o.seed}};
        } else if constexpr (std::is_same_v<T, RandomLabelConfig>) {
          return {{"kind", "random_label"}, {"classes", o.classes}, {"base", emit_oracle(*o.base)}};
        } else {
          return {{"kind", "pool"}, {"size", o.size}, {"seed", o.seed}, {"base", emit_oracle(*o.base)}};
        }
      },
      c.v);
}

inline std::size_t oracle_dim(const OracleConfig& c) {
  return std::visit(
      [](const auto& o) -> std::size_t {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, GaussianLinearConfig>)
          return o.dim;
        else if constexpr (std::is_same_v<T, TeacherConfig>)
          return o.input_dim;
        else
          return oracle_dim(*o.base);
      },
      c.v);
}

inline Head parse_head(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = as_string(r.required("kind"), r.child("kind"));
  Head h;
  if (kind == "softmax_xent") {
    h = SoftmaxXent{as_count(r.required("classes"), r.child("classes"))};
  } else if (kind == "mse") {
    MseOnLogits m;
    if (const auto* v = r.optional("outputs")) m.outputs = as_count(*v, r.child("outputs"));
    h = m;
  } else {
    throw ConfigError("expected \"softmax_xent\" or \"mse\"", r.child("kind"));
  }
  r.finish();
  return h;
}

inline json emit_head(const Head& h) {
  if (const auto* s = std::get_if<SoftmaxXent>(&h)) return {{"kind", "softmax_xent"}, {"classes", s->classes}};
  return {{"kind", "mse"}, {"outputs", std::get<MseOnLogits>(h).outputs}};
}

inline ModelSpec parse_model(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ModelSpec m;
  if (const auto* v = r.optional("hidden")) m.hidden_widths = count_list(*v, r.child("hidden"));
  if (const auto* v = r.optional("activation")) m.activation = parse_activation(*v, r.child("activation"));
  m.head = parse_head(r.required("head"), r.child("head"));
  if (const auto* v = r.optional("bias")) m.bias = as_bool(*v, r.child("bias"));
  r.finish();
  return m;
}

inline json emit_model(const ModelSpec& m) {
  return {{"hidden", m.hidden_widths},
          {"activation", activation_name(m.activation)},
          {"head", emit_head(m.head)},
          {"bias", m.bias}};
}

inline Schedule parse_schedule(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = as_string(r.required("kind"), r.child("kind"));
  Schedule s;
  if (kind == "constant") {
    s = ConstantLr{};
  } else if (kind == "cosine") {
    CosineDecay c;
    if (const auto* v = r.optional("total_steps")) c.total_steps = as_count(*v, r.child("total_steps"));
    s = c;
  } else if (kind == "step_drop") {
    StepDrop d;
    if (const auto* v = r.optional("drop_factor")) d.drop_factor = as_double(*v, r.child("drop_factor"));
    if (const auto* v = r.optional("milestones")) {
      d.milestones.clear();
      const std::string mp = r.child("milestones");
      for (std::size_t i = 0; i < as_array(*v, mp).size(); ++i) d.milestones.push_back(as_double((*v)[i], idx(mp, i)));
    }
    s = d;
  } else {
    throw ConfigError("expected \"constant\", \"cosine\" or \"step_drop\"", r.child("kind"));
  }
  r.finish();
  return s;
}

inline json emit_schedule(const Schedule& s) {
  if (std::holds_alternative<ConstantLr>(s)) return {{"kind", "constant"}};
  if (const auto* c = std::get_if<CosineDecay>(&s)) return {{"kind", "cosine"}, {"total_steps", c->total_steps}};
  const auto& d = std::get<StepDrop>(s);
  return {{"kind", "step_drop"}, {"drop_factor", d.drop_factor}, {"milestones", d.milestones}};
}

// Reads the optimizer-kind fields out of an object that may also hold others.
inline OptimizerKind parse_optimizer_kind(ObjectReader& r) {
  const std::string kind = as_string(r.required("kind"), r.child("kind"));
  if (kind == "gd") return PlainGd{};
  if (kind == "sgd") {
    Sgd s;
    if (const auto* v = r.optional("momentum")) s.momentum = as_double(*v, r.child("momentum"));
    return s;
  }
  if (kind == "adam") {
    Adam a;
    if (const auto* v = r.optional("beta1")) a.beta1 = as_double(*v, r.child("beta1"));
    if (const auto* v = r.optional("beta2")) a.beta2 = as_double(*v, r.child("beta2"));
    if (const auto* v = r.optional("eps")) a.eps = as_double(*v, r.child("eps"));
    return a;
  }
  throw ConfigError("expected \"gd\", \"sgd\" or \"adam\"", r.child("kind"));
}

inline void emit_optimizer_kind(const OptimizerKind& k, json& out) {
  if (std::holds_alternative<PlainGd>(k)) {
    out["kind"] = "gd";
  } else if (const auto* s = std::get_if<Sgd>(&k)) {
    out["kind"] = "sgd";
    out["momentum"] = s->momentum;
  } else {
    const auto& a = std::get<Adam>(k);
    out["kind"] = "adam";
    out["beta1"] = a.beta1;
    out["beta2"] = a.beta2;
    out["eps"] = a.eps;
  }
}

inline OptimizerSpec parse_optimizer(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  OptimizerSpec o;
  o.kind = parse_optimizer_kind(r);
  o.base_lr = as_double(r.required("lr"), r.child("lr"));
  o.batch_size = as_count(r.required("batch_size"), r.child("batch_size"));
  if (const auto* v = r.optional("schedule")) o.schedule = parse_schedule(*v, r.child("schedule"));
  r.finish();
  return o;
}

inline json emit_optimizer(const OptimizerSpec& o) {
  json j;
  emit_optimizer_kind(o.kind, j);
  j["lr"] = o.base_lr;
  j["batch_size"] = o.batch_size;
  j["schedule"] = emit_schedule(o.schedule);
  return j;
}

inline Augmentation parse_augmentation(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = as_string(r.required("kind"), r.child("kind"));
  Augmentation a;
  if (kind == "none") {
    a = NoAugmentation{};
  } else if (kind == "gaussian_noise") {
    a = GaussianNoise{as_double(r.required("sigma"), r.child("sigma"))};
  } else if (kind == "coord_dropout") {
    a = CoordDropout{as_double(r.required("p"), r.child("p"))};
  } else {
    throw ConfigError("expected \"none\", \"gaussian_noise\" or \"coord_dropout\"", r.child("kind"));
  }
  r.finish();
  validate(a);
  return a;
}

inline json emit_augmentation(const Augmentation& a) {
  if (const auto* g = std::get_if<GaussianNoise>(&a)) return {{"kind", "gaussian_noise"}, {"sigma", g->sigma}};
  if (const auto* c = std::get_if<CoordDropout>(&a)) return {{"kind", "coord_dropout"}, {"p", c->p}};
  return {{"kind", "none"}};
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  using namespace detail;
  ObjectReader r(j, "");
  ExperimentConfig c;
  const json& version = r.required("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion)
    throw ConfigError("unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")",
                      "schema_version");
  c.name = as_string(r.required("name"), "name");
  if (c.name.empty() || c.name.find('/') != std::string::npos)
    throw ConfigError("name must be non-empty and contain no '/'", "name");
  c.oracle = parse_oracle(r.required("oracle"), "oracle");
  if (const auto* v = r.optional("eval_oracle")) c.eval_oracle = parse_oracle(*v, "eval_oracle");
  c.n = as_count(r.required("n"), "n");
  c.model = parse_model(r.required("model"), "model");
  c.model.input_dim = oracle_dim(c.oracle);
  c.optimizer = parse_optimizer(r.required("optimizer"), "optimizer");
  c.steps = as_count(r.required("steps"), "steps");
  if (const auto* v = r.optional("eval_every")) c.eval_every = as_count(*v, "eval_every");
  if (const auto* v = r.optional("eval_samples")) c.eval_samples = as_count(*v, "eval_samples");
  if (const auto* v = r.optional("stop_threshold")) c.stop_threshold = as_double(*v, "stop_threshold");
  if (const auto* v = r.optional("augmentation")) c.augmentation = parse_augmentation(*v, "augmentation");
  if (const auto* v = r.optional("real_sampling")) {
    const auto s = as_string(*v, "real_sampling");
    if (s == "epoch_shuffle")
      c.real_sampling = RealSampling::epoch_shuffle;
    else if (s == "with_replacement")
      c.real_sampling = RealSampling::with_replacement;
    else
      throw ConfigError("expected \"epoch_shuffle\" or \"with_replacement\"", "real_sampling");
  }
  {
    const json& seeds = r.required("seeds");
    for (std::size_t i = 0; i < as_array(seeds, "seeds").size(); ++i) c.seeds.push_back(as_u64(seeds[i], idx("seeds", i)));
    if (c.seeds.empty()) throw ConfigError("at least one seed is required", "seeds");
  }
  if (const auto* v = r.optional("sweep")) {
    ObjectReader s(*v, "sweep");
    if (const auto* a = s.optional("n")) c.sweep.n = count_list(*a, "sweep.n");
    if (const auto* a = s.optional("lr")) {
      for (std::size_t i = 0; i < as_array(*a, "sweep.lr").size(); ++i) c.sweep.lr.push_back(as_double((*a)[i], idx("sweep.lr", i)));
    }
    if (const auto* a = s.optional("augmentation")) {
      for (std::size_t i = 0; i < as_array(*a, "sweep.augmentation").size(); ++i)
        c.sweep.augmentation.push_back(parse_augmentation((*a)[i], idx("sweep.augmentation", i)));
    }
    if (const auto* a = s.optional("optimizer")) {
      for (std::size_t i = 0; i < as_array(*a, "sweep.optimizer").size(); ++i) {
        ObjectReader o((*a)[i], idx("sweep.optimizer", i));
        c.sweep.optimizer.push_back(parse_optimizer_kind(o));
        o.finish();
      }
    }
    s.finish();
  }
  if (const auto* v = r.optional("output_dir")) c.output_dir = as_string(*v, "output_dir");
  r.finish();
  return c;
}

inline json emit_config(const ExperimentConfig& c) {
  using namespace detail;
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["oracle"] = emit_oracle(c.oracle);
  if (c.eval_oracle) j["eval_oracle"] = emit_oracle(*c.eval_oracle);
  j["n"] = c.n;
  j["model"] = emit_model(c.model);
  j["optimizer"] = emit_optimizer(c.optimizer);
  j["steps"] = c.steps;
  j["eval_every"] = c.eval_every;
  j["eval_samples"] = c.eval_samples;
  j["stop_threshold"] = c.stop_threshold;
  j["augmentation"] = emit_augmentation(c.augmentation);
  j["real_sampling"] = c.real_sampling == RealSampling::epoch_shuffle ? "epoch_shuffle" : "with_replacement";
  j["seeds"] = c.seeds;
  json sweep = json::object();
  if (!c.sweep.n.empty()) sweep["n"] = c.sweep.n;
  if (!c.sweep.lr.empty()) sweep["lr"] = c.sweep.lr;
  if (!c.sweep.augmentation.empty()) {
    sweep["augmentation"] = json::array();
    for (const auto& a : c.sweep.augmentation) sweep["augmentation"].push_back(emit_augmentation(a));
  }
  if (!c.sweep.optimizer.empty()) {
    sweep["optimizer"] = json::array();
    for (const auto& k : c.sweep.optimizer) {
      json o;
      emit_optimizer_kind(k, o);
      sweep["optimizer"].push_back(o);
    }
  }
  j["sweep"] = sweep;
  j["output_dir"] = c.output_dir;
  return j;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), "<root>");
  }
  return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// One point of the sweep grid.
struct SweepPoint {
  std::size_t index = 0;
  std::size_t n = 0;
  double lr = 0.0;
  Augmentation augmentation;
  OptimizerKind optimizer;
};

// Cartesian product of the non-empty axes (n outermost, optimizer innermost);
// empty axes contribute the base value.
inline std::vector<SweepPoint> expand_sweep(const ExperimentConfig& c) {
  const auto ns = c.sweep.n.empty() ? std::vector<std::size_t>{c.n} : c.sweep.n;
  const auto lrs = c.sweep.lr.empty() ? std::vector<double>{c.optimizer.base_lr} : c.sweep.lr;
  const auto augs = c.sweep.augmentation.empty() ? std::vector<Augmentation>{c.augmentation} : c.sweep.augmentation;
  const auto opts = c.sweep.optimizer.empty() ? std::vector<OptimizerKind>{c.optimizer.kind} : c.sweep.optimizer;
  std::vector<SweepPoint> out;
  for (auto n : ns)
    for (auto lr : lrs)
      for (const auto& a : augs)
        for (const auto& o : opts) out.push_back({out.size(), n, lr, a, o});
  return out;
}

// The single-point, single-seed config that reproduces one run.
inline ExperimentConfig point_config(const ExperimentConfig& c, const SweepPoint& p, std::uint64_t seed) {
  ExperimentConfig out = c;
  out.n = p.n;
  out.optimizer.base_lr = p.lr;
  out.augmentation = p.augmentation;
  out.optimizer.kind = p.optimizer;
  out.sweep = {};
  out.seeds = {seed};
  return out;
}

// WorldConfig for one (point, seed). `oracle` / `eval_oracle` are built once
// per point by the caller and shared.
inline WorldConfig world_config(const ExperimentConfig& single, std::shared_ptr<const DistributionOracle> oracle,
                                std::shared_ptr<const DistributionOracle> eval_oracle) {
  WorldConfig w;
  w.oracle = std::move(oracle);
  w.eval_oracle = std::move(eval_oracle);
  w.n = single.n;
  w.model = single.model;
  w.optimizer = single.optimizer;
  w.total_steps = single.steps;
  w.augmentation = single.augmentation;
  w.master_seed = single.seeds.at(0);
  w.eval_every = single.eval_every;
  w.eval_samples = single.eval_samples;
  w.stop_threshold = single.stop_threshold;
  w.real_sampling = single.real_sampling;
  return w;
}

// Full semantic validation: builds every point's oracle and world config.
inline void validate(const ExperimentConfig& c) {
  if (c.seeds.empty()) throw ConfigError("at least one seed is required", "seeds");
  for (const auto& p : expand_sweep(c)) {
    const auto single = point_config(c, p, c.seeds.front());
    auto oracle = std::make_shared<const DistributionOracle>(build_oracle(single.oracle));
    std::shared_ptr<const DistributionOracle> eval;
    if (single.eval_oracle) eval = std::make_shared<const DistributionOracle>(build_oracle(*single.eval_oracle));
    validate(world_config(single, oracle, eval));
  }
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

// FNV-1a of the canonical JSON form.
inline std::string config_hash(const ExperimentConfig& c) { return hex64(detail::fnv1a(emit_config(c).dump())); }

}  // namespace deepboot
