#pragma once

// Executes an ExperimentConfig: every (sweep point x seed) job runs a coupled
// Real/Ideal pair and writes its own directory:
//
//   <root>/<name>/point_<i>/seed_<s>/real.jsonl
//   <root>/<name>/point_<i>/seed_<s>/ideal.jsonl
//   <root>/<name>/point_<i>/seed_<s>/summary.json
//
// followed by <root>/<name>/manifest.json once all jobs are done.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "deepboot/config.hpp"
#include "deepboot/records.hpp"
#include "deepboot/worlds.hpp"

namespace deepboot {

struct RunOutcome {
  std::size_t point = 0;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  bool aborted = false;
  std::string abort_reason;
};

struct ExperimentResult {
  std::filesystem::path root;
  std::vector<RunOutcome> runs;
  bool any_aborted() const {
    return std::any_of(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.aborted; });
  }
};

inline json point_to_json(const SweepPoint& p) {
  json o;
  detail::emit_optimizer_kind(p.optimizer, o);
  return {{"index", p.index},
          {"n", p.n},
          {"lr", p.lr},
          {"augmentation", detail::emit_augmentation(p.augmentation)},
          {"optimizer", o}};
}

inline RunOutcome run_single(const ExperimentConfig& single, const SweepPoint& point,
                             std::shared_ptr<const DistributionOracle> oracle,
                             std::shared_ptr<const DistributionOracle> eval_oracle, const std::filesystem::path& dir) {
  const WorldConfig world = world_config(single, std::move(oracle), std::move(eval_oracle));
  const CoupledReport coupled = run_coupled(world);
  const std::string hash = config_hash(single);
  const std::uint64_t seed = single.seeds.front();

  std::filesystem::create_directories(dir);
  write_file((dir / "real.jsonl").string(), trajectory_to_jsonl(coupled.real, {kSchemaVersion, hash, seed, WorldTag::real}));
  write_file((dir / "ideal.jsonl").string(),
             trajectory_to_jsonl(coupled.ideal, {kSchemaVersion, hash, seed, WorldTag::ideal}));

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["config_hash"] = hash;
  summary["seed"] = seed;
  summary["point"] = point_to_json(point);
  summary["config"] = emit_config(single);
  summary["aborted"] = coupled.aborted;
  std::string reason = coupled.real.abort_reason.empty() ? coupled.ideal.abort_reason : coupled.real.abort_reason;
  summary["abort_reason"] = reason;
  summary["real_converged_step"] = coupled.real.converged_step ? json(*coupled.real.converged_step) : json(nullptr);
  summary["ideal_converged_step"] = coupled.ideal.converged_step ? json(*coupled.ideal.converged_step) : json(nullptr);
  summary["report"] = report_to_json(coupled.report);
  write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
  return {point.index, seed, dir, coupled.aborted, reason};
}

// Runs every job with at most `jobs` worker threads. Job outputs do not
// depend on scheduling order.
inline ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_root,
                                       std::uint64_t seed_offset = 0, std::size_t jobs = 1) {
  validate(config);
  const auto points = expand_sweep(config);

  struct Job {
    const SweepPoint* point;
    std::uint64_t seed;
  };
  std::vector<Job> queue;
  for (const auto& p : points)
    for (auto s : config.seeds) queue.push_back({&p, s + seed_offset});

  // Oracles depend only on the point, not the seed.
  std::vector<std::shared_ptr<const DistributionOracle>> oracles, eval_oracles;
  for (const auto& p : points) {
    const auto single = point_config(config, p, 0);
    oracles.push_back(std::make_shared<const DistributionOracle>(build_oracle(single.oracle)));
    eval_oracles.push_back(single.eval_oracle
                               ? std::make_shared<const DistributionOracle>(build_oracle(*single.eval_oracle))
                               : nullptr);
  }

  ExperimentResult result;
  result.root = output_root / config.name;
  result.runs.resize(queue.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < queue.size(); i = next++) {
      try {
        const Job& job = queue[i];
        const auto single = point_config(config, *job.point, job.seed);
        const auto dir = result.root / ("point_" + std::to_string(job.point->index)) / ("seed_" + std::to_string(job.seed));
        result.runs[i] = run_single(single, *job.point, oracles[job.point->index], eval_oracles[job.point->index], dir);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, queue.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["name"] = config.name;
  manifest["config"] = emit_config(config);
  manifest["seed_offset"] = seed_offset;
  manifest["runs"] = json::array();
  for (const auto& r : result.runs)
    manifest["runs"].push_back({{"point", r.point},
                                {"seed", r.seed},
                                {"dir", std::filesystem::relative(r.dir, result.root).generic_string()},
                                {"aborted", r.aborted}});
  write_file((result.root / "manifest.json").string(), manifest.dump(2) + "\n");
  return result;
}

}  // namespace deepboot
