#pragma once

// Subcommand implementations behind the `deepboot` executable. Each returns
// the process exit code: 0 ok, 2 configuration / input error, 3 numerical
// abort or divergence.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "deepboot/config.hpp"
#include "deepboot/experiment.hpp"
#include "deepboot/records.hpp"
#include "deepboot/report.hpp"
#include "deepboot/toy.hpp"

namespace deepboot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr const char* kOutputRootEnv = "DEEPBOOT_OUTPUT_ROOT";

// Relative output_dir values resolve against $DEEPBOOT_OUTPUT_ROOT when set.
inline std::filesystem::path resolve_output_root(const ExperimentConfig& c, const std::optional<std::string>& override_dir) {
  if (override_dir) return *override_dir;
  std::filesystem::path p = c.output_dir;
  if (p.is_relative())
    if (const char* env = std::getenv(kOutputRootEnv); env && *env) return std::filesystem::path(env) / p;
  return p;
}

inline int cmd_validate(const std::string& path, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    const auto c = load_config(path);
    validate(c);
    out << "ok: " << c.name << " (" << expand_sweep(c).size() << " sweep points x " << c.seeds.size() << " seeds)\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

struct RunOptions {
  std::optional<std::string> out_dir;
  std::uint64_t seed_offset = 0;
  std::size_t jobs = 0;  // 0 = hardware concurrency
};

inline int cmd_run(const std::string& path, const RunOptions& opts = {}, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  ExperimentConfig config;
  try {
    config = load_config(path);
    validate(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const std::size_t jobs = opts.jobs ? opts.jobs : std::max(1u, std::thread::hardware_concurrency());
  try {
    const auto result = run_experiment(config, resolve_output_root(config, opts.out_dir), opts.seed_offset, jobs);
    for (const auto& r : result.runs) {
      out << (r.aborted ? "ABORT " : "done  ") << r.dir.string();
      if (r.aborted) out << "  (" << r.abort_reason << ")";
      out << "\n";
    }
    if (result.any_aborted()) {
      err << "one or more runs aborted on non-finite values; partial records kept\n";
      return kExitNumerical;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalAbort& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  }
}

struct ToyOptions {
  std::string setting = "A";
  std::optional<std::size_t> n;
  std::optional<std::size_t> d;
  std::optional<double> eta;
  std::optional<std::size_t> steps;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> seed_count;
  std::uint64_t seed_offset = 0;
  std::size_t mc_eval = 0;
  std::optional<std::string> out;  // CSV of median curves; stdout summary only when unset
};

inline toy::ToySetting toy_setting_from(const ToyOptions& o) {
  toy::ToySetting s;
  if (o.setting == "A" || o.setting == "a")
    s = toy::setting_a();
  else if (o.setting == "B" || o.setting == "b")
    s = toy::setting_b();
  else
    throw ConfigError("setting must be A or B", "--setting");
  if (o.n) s.n = *o.n;
  if (o.d) s.d = *o.d;
  if (o.eta) s.eta = *o.eta;
  if (o.steps) s.steps = *o.steps;
  if (!o.seeds.empty() && o.seed_count) throw ConfigError("use either --seeds or --seed-count", "--seeds");
  if (!o.seeds.empty()) s.seeds = o.seeds;
  if (o.seed_count) s.seeds = toy::seed_range(*o.seed_count);
  for (auto& seed : s.seeds) seed += o.seed_offset;
  s.mc_eval_samples = o.mc_eval;
  if (s.n == 0) throw ConfigError("n must be >= 1", "--n");
  if (s.d < 11) throw ConfigError("d must be >= 11", "--d");
  if (s.seeds.empty()) throw ConfigError("at least one seed is required", "--seeds");
  return s;
}

inline std::string toy_csv(const toy::ToyCurves& c) {
  std::string s = "step,median_real_train_mse,median_real_test_mse,median_ideal_test_mse\n";
  for (std::size_t t = 0; t < c.median_real_test_mse.size(); ++t)
    s += std::to_string(t) + "," + json(c.median_real_train_mse[t]).dump() + "," + json(c.median_real_test_mse[t]).dump() +
         "," + json(c.median_ideal_test_mse[t]).dump() + "\n";
  return s;
}

inline int cmd_toy(const ToyOptions& opts, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  toy::ToySetting s;
  try {
    s = toy_setting_from(opts);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const auto curves = toy::run_toy(s);
    if (opts.out) write_file(*opts.out, toy_csv(curves));
    out << "setting=" << opts.setting << " activation=" << (s.activation == LabelActivation::sign ? "sign" : "identity")
        << " n=" << s.n << " d=" << s.d << " eta=" << s.eta << " steps=" << s.steps << " seeds=" << s.seeds.size() << "\n";
    out << "terminal median real_test_mse=" << curves.median_real_test_mse.back()
        << " ideal_test_mse=" << curves.median_ideal_test_mse.back()
        << " real_train_mse=" << curves.median_real_train_mse.back() << "\n";
    out << "terminal median bootstrap_gap=" << curves.median_terminal_bootstrap_gap()
        << " generalization_gap=" << curves.median_terminal_generalization_gap() << "\n";
    return kExitOk;
  } catch (const NumericalAbort& e) {
    err << "divergence: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline int cmd_report(const std::string& dir, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    const auto r = generate_report(dir);
    out << "report for " << r.runs << " runs written to " << r.out_dir.string() << "\n";
    return kExitOk;
  } catch (const NumericalAbort& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "report error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace deepboot::cli
