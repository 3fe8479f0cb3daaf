// deepboot: run coupled Real/Ideal World experiments, toy reproductions and
// reports.
//
//   deepboot run <config.json> [--out DIR] [--seed-offset K] [--jobs J]
//   deepboot toy [--setting A|B] [--n N] [--eta ETA] [--steps T] [--seeds S...]
//   deepboot report <run-dir>
//   deepboot validate <config.json>

#include <iostream>

#include "CLI11.hpp"

#include "deepboot/cli.hpp"

int main(int argc, char** argv) {
  using namespace deepboot::cli;
  CLI::App app{"Real World vs Ideal World training laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  RunOptions run_opts;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "run a coupled experiment (all sweep points x seeds)");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output root (overrides config output_dir and $DEEPBOOT_OUTPUT_ROOT)");
  run->add_option("--seed-offset", run_opts.seed_offset, "added to every trial seed");
  run->add_option("--jobs", run_opts.jobs, "worker threads (default: hardware concurrency)");

  ToyOptions toy_opts;
  std::size_t n = 0, d = 0, steps = 0, seed_count = 0;
  double eta = 0.0;
  std::string toy_out;
  auto* toy = app.add_subcommand("toy", "linear-regression toy, Settings A / B");
  toy->add_option("--setting", toy_opts.setting, "A (identity, n=20) or B (sign, n=100)")->check(CLI::IsMember({"A", "B", "a", "b"}));
  auto* n_opt = toy->add_option("--n", n, "train samples");
  auto* d_opt = toy->add_option("--d", d, "dimension");
  auto* eta_opt = toy->add_option("--eta", eta, "step size");
  auto* steps_opt = toy->add_option("--steps", steps, "GD steps");
  toy->add_option("--seeds", toy_opts.seeds, "explicit seed list");
  auto* count_opt = toy->add_option("--seed-count", seed_count, "use seeds 0..count-1");
  toy->add_option("--seed-offset", toy_opts.seed_offset, "added to every seed");
  toy->add_option("--mc-eval", toy_opts.mc_eval, "Monte Carlo eval samples for terminal TestMSE (0 = off)");
  toy->add_option("--out", toy_out, "write median curves as CSV");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "summaries and charts from run records");
  report->add_option("dir", report_dir, "run directory")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config file without running it");
  validate->add_option("config", validate_path, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*run) {
    if (!out_dir.empty()) run_opts.out_dir = out_dir;
    return cmd_run(config_path, run_opts);
  }
  if (*toy) {
    if (*n_opt) toy_opts.n = n;
    if (*d_opt) toy_opts.d = d;
    if (*eta_opt) toy_opts.eta = eta;
    if (*steps_opt) toy_opts.steps = steps;
    if (*count_opt) toy_opts.seed_count = seed_count;
    if (!toy_out.empty()) toy_opts.out = toy_out;
    return cmd_toy(toy_opts);
  }
  if (*report) return cmd_report(report_dir);
  return cmd_validate(validate_path);
}
