// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "deepboot/deepboot.hpp"

using namespace deepboot;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Every coupled run made anywhere in this binary must start at eps = 0.
struct EpsZeroLog {
  std::size_t runs = 0;
  std::size_t violations = 0;
  void note(const BootstrapReport& r) {
    ++runs;
    if (r.eps_series.empty() || r.eps_series.front().first != 0 || r.eps_series.front().second != 0.0) ++violations;
  }
};
EpsZeroLog g_eps0;

CoupledReport coupled(const WorldConfig& c) {
  auto r = run_coupled(c);
  g_eps0.note(r.report);
  return r;
}

std::shared_ptr<const DistributionOracle> default_teacher() {
  static const auto o = std::make_shared<const DistributionOracle>(
      make_teacher_task(64, ModelSpec{64, {64}, Activation::relu, SoftmaxXent{2}, true}, 0));
  return o;
}

WorldConfig default_world(std::size_t n, std::uint64_t seed) {
  WorldConfig c;
  c.oracle = default_teacher();
  c.n = n;
  c.model = ModelSpec{64, {64}, Activation::relu, SoftmaxXent{2}, true};
  c.optimizer = OptimizerSpec{Sgd{0.9}, 0.05, CosineDecay{}, 128};
  c.total_steps = 1000;
  c.eval_every = 25;
  c.eval_samples = 10000;
  c.master_seed = seed;
  return c;
}

Outcome toy_contrast() {
  const auto a = toy::run_toy(toy::setting_a());
  const auto b = toy::run_toy(toy::setting_b());
  const double boot_a = a.median_terminal_bootstrap_gap();
  const double boot_b = b.median_terminal_bootstrap_gap();
  const double gen_b = b.median_terminal_generalization_gap();
  const bool pass = boot_b < boot_a && gen_b >= 2.0 * boot_b;
  return {pass, fmt("A boot=%.5f  B boot=%.5f  B gen=%.5f  (gen/boot=%.2f)", boot_a, boot_b, gen_b, gen_b / boot_b)};
}

Outcome closed_form() {
  const auto curve = toy::ideal_curve(toy::gaussian_linear_of(toy::setting_a()), 0.1, 100);
  double worst = 0.0;
  for (std::size_t t = 0; t <= 100; ++t) {
    const double exact = std::pow(0.8, 2.0 * static_cast<double>(t));
    worst = std::max(worst, std::abs(curve[t] - exact) / exact);
  }
  return {worst < 1e-10, fmt("max relative error %.3e over t<=100", worst)};
}

Outcome gradients() {
  struct Case {
    const char* name;
    ModelSpec spec;
  };
  const std::vector<Case> cases = {
      {"linear/softmax", ModelSpec{40, {}, Activation::identity, SoftmaxXent{4}, true}},
      {"linear/mse", ModelSpec{150, {}, Activation::identity, MseOnLogits{1}, true}},
      {"mlp/softmax", ModelSpec{12, {16, 8}, Activation::relu, SoftmaxXent{3}, true}},
      {"mlp/mse", ModelSpec{12, {16, 8}, Activation::relu, MseOnLogits{2}, true}},
  };
  double worst = 0.0;
  std::size_t min_checked = SIZE_MAX;
  for (const auto& c : cases) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto params = init_params(c.spec, seed);
      RngStream r = RngStream::derive(seed, StreamPurpose::generic, 0xAC);
      Matrix x(16, c.spec.input_dim);
      for (double& v : x.flat()) v = r.normal();
      std::vector<double> y(16);
      for (double& v : y) v = is_softmax(c.spec.head) ? static_cast<double>(r.below(c.spec.output_dim())) : r.normal();
      if (!is_softmax(c.spec.head) && c.spec.output_dim() > 1)
        for (double& v : y) v = static_cast<double>(r.below(c.spec.output_dim()));
      const auto g = grad_check(c.spec, params, x, y, 1e-5, 128, seed);
      worst = std::max(worst, g.max_relative_error);
      min_checked = std::min(min_checked, g.checked);
    }
  }
  return {worst < 1e-5 && min_checked >= 100,
          fmt("max relative error %.3e, >= %zu coordinates per check, 4 models x 5 seeds", worst, min_checked)};
}

Outcome random_labels() {
  WorldConfig c = default_world(2000, 0);
  c.oracle = std::make_shared<const DistributionOracle>(make_random_label(*default_teacher(), 10));
  c.model.head = SoftmaxXent{10};
  c.optimizer.base_lr = 0.1;
  c.total_steps = 1000;
  c.eval_every = 100;
  c.eval_samples = 10000;
  const auto r = coupled(c);
  const double real = *r.real.records.back().test_soft_error;
  const double ideal = *r.ideal.records.back().test_soft_error;
  const bool pass = !r.aborted && std::abs(real - 0.9) <= 0.02 && std::abs(ideal - 0.9) <= 0.02;
  return {pass, fmt("final test soft-error real=%.4f ideal=%.4f (real train error %.4f)", real, ideal,
                    r.real.records.back().train_error)};
}

Outcome self_coupling() {
  double worst_ratio = 0.0;
  std::size_t steps_checked = 0;
  bool aborted = false;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    WorldConfig c = default_world(2000, seed);
    const auto pool = std::make_shared<const TrainSet>(draw_trainset(*c.oracle, c.n, seed));
    c.oracle = std::make_shared<const DistributionOracle>(make_pool_backed(*pool, c.oracle->label_info()));
    c.eval_oracle = default_teacher();
    c.trainset = pool;
    c.real_sampling = RealSampling::with_replacement;
    // Large batches keep optimizer noise below the evaluation noise the bound is stated in.
    c.optimizer.batch_size = 512;
    c.total_steps = 300;
    const auto r = coupled(c);
    aborted |= r.aborted;
    for (std::size_t i = 0; i < r.report.eps_series.size(); ++i) {
      const double p = *r.ideal.records[i].test_soft_error;
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(c.eval_samples));
      const double eps = std::abs(r.report.eps_series[i].second);
      worst_ratio = std::max(worst_ratio, se > 0.0 ? eps / se : (eps > 0.0 ? INFINITY : 0.0));
      ++steps_checked;
    }
  }
  return {!aborted && worst_ratio < 3.0,
          fmt("max |eps| / binomial SE = %.3f over %zu eval steps, 5 seeds", worst_ratio, steps_checked)};
}

Outcome sample_size_trends() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::size_t> ns = {1000, 4000, 16000};
  std::vector<double> t0_med, eps_med;
  bool aborted = false;
  for (std::size_t n : ns) {
    std::vector<double> t0s, eps;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      WorldConfig c = default_world(n, seed);
      c.total_steps = 3000;
      c.eval_samples = 5000;
      const auto r = coupled(c);
      aborted |= r.aborted;
      t0s.push_back(static_cast<double>(r.report.report_step));
      eps.push_back(r.report.max_abs_eps_pre_t0);
    }
    t0_med.push_back(toy::median(t0s));
    eps_med.push_back(toy::median(eps));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = !aborted && t0_med[0] <= t0_med[1] && t0_med[1] <= t0_med[2] && eps_med[0] >= eps_med[1] &&
                    eps_med[1] >= eps_med[2];
  return {pass, fmt("median T0 %.1f/%.1f/%.1f, median max|eps| %.4f/%.4f/%.4f for n=1k/4k/16k (%.0f s)", t0_med[0],
                    t0_med[1], t0_med[2], eps_med[0], eps_med[1], eps_med[2], secs)};
}

Outcome g_equivalence() {
  WorldConfig c = default_world(1000, 3);
  c.total_steps = 200;
  c.eval_samples = 5000;
  const auto s = real_trainset(c);
  const double iid_world = *train_world(c, IidSequence{}).records.back().test_soft_error;
  const double iid_g =
      evaluate_G(c.model, c.optimizer, generate_sequence(c, IidSequence{}), *c.oracle, c.eval_samples, c.master_seed);
  const double wr_world = *train_world(c, WithReplacementSequence{s}).records.back().test_soft_error;
  const double wr_g = evaluate_G(c.model, c.optimizer, generate_sequence(c, WithReplacementSequence{s}), *c.oracle,
                                 c.eval_samples, c.master_seed);
  return {iid_world == iid_g && wr_world == wr_g,
          fmt("iid: world=%.17g G=%.17g; with-replacement: world=%.17g G=%.17g", iid_world, iid_g, wr_world, wr_g)};
}

std::vector<ExperimentConfig> shipped_configs() {
  std::vector<ExperimentConfig> out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(DEEPBOOT_CONFIG_DIR))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(load_config(f.string()));
  return out;
}

Outcome determinism() {
  const auto tmp = fs::temp_directory_path() / "deepboot_acceptance";
  fs::remove_all(tmp);
  std::size_t round_trips = 0, compared = 0;
  bool ok = true;
  std::string why;
  for (const auto& c : shipped_configs()) {
    const auto back = parse_config(emit_config(c));
    if (!(back == c) || emit_config(back).dump() != emit_config(c).dump()) {
      ok = false;
      why += " round-trip:" + c.name;
    }
    ++round_trips;
  }
  auto c = load_config((fs::path(DEEPBOOT_CONFIG_DIR) / "quickstart.json").string());
  c.steps = 120;
  run_experiment(c, tmp / "a");
  run_experiment(c, tmp / "b", 0, 2);
  for (const auto& e : fs::recursive_directory_iterator(tmp / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), tmp / "a");
    if (read_file(e.path().string()) != read_file((tmp / "b" / rel).string())) {
      ok = false;
      why += " differs:" + rel.string();
    }
    ++compared;
  }
  const auto root = tmp / "a" / c.name;
  for (const auto& run : load_runs(root)) g_eps0.note(run.report);
  generate_report(root);
  std::vector<std::pair<fs::path, std::string>> first;
  for (const auto& e : fs::recursive_directory_iterator(root / "report"))
    if (e.is_regular_file()) first.emplace_back(e.path(), read_file(e.path().string()));
  generate_report(root);
  for (const auto& [p, text] : first)
    if (read_file(p.string()) != text) {
      ok = false;
      why += " report:" + p.filename().string();
    }
  fs::remove_all(tmp);
  return {ok && compared > 0 && !first.empty(),
          fmt("%zu config round-trips, %zu record files byte-identical, %zu report files idempotent%s", round_trips,
              compared, first.size(), why.c_str())};
}

Outcome schedules() {
  const double mid = lr_at(CosineDecay{}, 0.1, 500, 1000);
  const std::size_t T = 3000;
  const Schedule sd = StepDrop{0.1, {1.0 / 3.0, 2.0 / 3.0}};
  const double p1 = lr_at(sd, 0.1, 500, T), p2 = lr_at(sd, 0.1, 1500, T), p3 = lr_at(sd, 0.1, 2500, T);
  const double b1 = lr_at(sd, 0.1, 999, T), b2 = lr_at(sd, 0.1, 1000, T), b3 = lr_at(sd, 0.1, 2000, T);
  const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-15; };
  const bool pass = near(mid, 0.05) && near(p1, 0.1) && near(p2, 0.01) && near(p3, 0.001) && near(b1, 0.1) &&
                    near(b2, 0.01) && near(b3, 0.001);
  return {pass, fmt("cosine midpoint %.17g; step-drop phases %.3g/%.3g/%.3g, at milestones %.3g/%.3g", mid, p1, p2, p3,
                    b2, b3)};
}

Outcome coupling_soundness() {
  // Short runs of every shipped config, on top of all runs already made above.
  for (const auto& c : shipped_configs()) {
    for (const auto& p : expand_sweep(c)) {
      auto single = point_config(c, p, c.seeds.front());
      single.steps = std::min<std::size_t>(single.steps, 20);
      single.eval_every = 10;
      single.eval_samples = std::min<std::size_t>(single.eval_samples, 1000);
      auto oracle = std::make_shared<const DistributionOracle>(build_oracle(single.oracle));
      std::shared_ptr<const DistributionOracle> eval;
      if (single.eval_oracle) eval = std::make_shared<const DistributionOracle>(build_oracle(*single.eval_oracle));
      coupled(world_config(single, oracle, eval));
    }
  }
  return {g_eps0.violations == 0 && g_eps0.runs > 0,
          fmt("eps(0) = 0 exactly in %zu of %zu coupled runs", g_eps0.runs - g_eps0.violations, g_eps0.runs)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  // Coupling soundness runs last so it covers every coupled run made here.
  const std::vector<Criterion> criteria = {
      {1, "toy Setting A/B contrast", toy_contrast},
      {2, "closed-form Ideal World trajectory", closed_form},
      {3, "gradient correctness", gradients},
      {5, "random-label chance level", random_labels},
      {6, "self-coupling null", self_coupling},
      {7, "sample-size trends", sample_size_trends},
      {8, "G-function equivalence", g_equivalence},
      {9, "determinism and round-trip", determinism},
      {10, "schedule unit values", schedules},
      {4, "coupling soundness", coupling_soundness},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    lines.emplace_back(c.id, fmt("%s  criterion %2d  %-36s %s  [%.1fs]", o.pass ? "PASS" : "FAIL", c.id, c.name,
                                 o.detail.c_str(), secs));
    std::fprintf(stderr, "%s\n", lines.back().second.c_str());
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
