#pragma once

// Rebuilds summaries and charts from the record files of a run directory.
// Nothing here trains; outputs are a pure function of the records.
//
//   <dir>/report/summary.csv      one row per coupled run
//   <dir>/report/curves/<run>.svg Real vs Ideal test soft-error + eps panel
//   <dir>/report/scatter.svg      end-of-training Real vs Ideal, with y = x

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "deepboot/config.hpp"
#include "deepboot/metrics.hpp"
#include "deepboot/records.hpp"
#include "deepboot/svg.hpp"

namespace deepboot {

struct RunData {
  std::string id;  // run directory relative to the report root, '/' -> '_'
  json summary;
  Trajectory real;
  Trajectory ideal;
  BootstrapReport report;
};

inline std::vector<std::filesystem::path> find_run_dirs(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw Error("not a directory: " + root.string());
  std::vector<fs::path> dirs;
  for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
    if (it->is_directory() && it->path().filename() == "report" && it->path().parent_path() == root) {
      it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && it->path().filename() == "summary.json") dirs.push_back(it->path().parent_path());
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

inline RunData load_run(const std::filesystem::path& root, const std::filesystem::path& dir) {
  RunData run;
  std::string rel = std::filesystem::relative(dir, root).generic_string();
  std::replace(rel.begin(), rel.end(), '/', '_');
  run.id = rel == "." ? "run" : rel;
  try {
    run.summary = json::parse(read_file((dir / "summary.json").string()));
  } catch (const json::parse_error& e) {
    throw Error("malformed summary in " + dir.string() + ": " + e.what());
  }
  const auto real = trajectory_from_jsonl(read_file((dir / "real.jsonl").string()));
  const auto ideal = trajectory_from_jsonl(read_file((dir / "ideal.jsonl").string()));
  const std::string hash = run.summary.value("config_hash", "");
  for (const auto* t : {&real, &ideal})
    if (t->header.config_hash != hash || t->header.schema_version != run.summary.value("schema_version", -1))
      throw Error("records in " + dir.string() + " do not match their summary");
  run.real = real.trajectory;
  run.ideal = ideal.trajectory;
  const std::size_t common = std::min(run.real.records.size(), run.ideal.records.size());
  Trajectory r = run.real, i = run.ideal;
  r.records.resize(common);
  i.records.resize(common);
  const double threshold = run.summary.at("config").value("stop_threshold", 0.01);
  run.report = bootstrap_report(r, i, threshold);
  return run;
}

inline std::vector<RunData> load_runs(const std::filesystem::path& root) {
  const auto dirs = find_run_dirs(root);
  if (dirs.empty()) throw Error("no run records found under " + root.string());
  std::vector<RunData> runs;
  std::set<int> versions;
  for (const auto& d : dirs) {
    runs.push_back(load_run(root, d));
    versions.insert(runs.back().summary.value("schema_version", -1));
  }
  if (versions.size() > 1) throw Error("run directory mixes record schema versions");
  if (*versions.begin() != kSchemaVersion)
    throw Error("unsupported record schema version " + std::to_string(*versions.begin()));
  return runs;
}

namespace detail {

inline std::string csv_num(double v) { return json(v).dump(); }

}  // namespace detail

inline std::string summary_csv(const std::vector<RunData>& runs) {
  std::string out =
      "run,config_hash,seed,point,n,lr,t0,t0_fallback,report_step,eps_at_t0,max_abs_eps_pre_t0,gen_gap_at_t0,"
      "final_step,final_real_test,final_ideal_test,aborted\n";
  for (const auto& run : runs) {
    const auto& s = run.summary;
    const auto& rep = run.report;
    const auto& last = rep.eps_series.back();
    const std::size_t k = rep.eps_series.size() - 1;
    out += run.id + "," + s.value("config_hash", "") + "," + std::to_string(s.value("seed", std::uint64_t{0})) + "," +
           std::to_string(s.at("point").value("index", std::size_t{0})) + "," +
           std::to_string(s.at("point").value("n", std::size_t{0})) + "," + detail::csv_num(s.at("point").value("lr", 0.0)) +
           "," + (rep.t0 ? std::to_string(*rep.t0) : std::string()) + "," + (rep.t0_fallback ? "1" : "0") + "," +
           std::to_string(rep.report_step) + "," + detail::csv_num(rep.eps_at_t0) + "," +
           detail::csv_num(rep.max_abs_eps_pre_t0) + "," + detail::csv_num(rep.gen_gap_at_t0) + "," +
           std::to_string(last.first) + "," + detail::csv_num(gap_metric(run.real.records[k])) + "," +
           detail::csv_num(gap_metric(run.ideal.records[k])) + "," + (s.value("aborted", false) ? "1" : "0") + "\n";
  }
  return out;
}

inline std::string curves_svg(const RunData& run) {
  const auto& rep = run.report;
  const std::optional<double> fade = static_cast<double>(rep.report_step);
  svg::Series real{"Real", "#d62728", {}, fade};
  svg::Series ideal{"Ideal", "#1f77b4", {}, fade};
  svg::Series eps{"eps = Real - Ideal", "#2ca02c", {}, fade};
  const std::size_t k = rep.eps_series.size();
  for (std::size_t i = 0; i < k; ++i) {
    const double step = static_cast<double>(run.real.records[i].step);
    real.points.emplace_back(step, gap_metric(run.real.records[i]));
    ideal.points.emplace_back(step, gap_metric(run.ideal.records[i]));
    eps.points.emplace_back(step, rep.eps_series[i].second);
  }
  const bool soft = !run.real.records.empty() && run.real.records.front().test_soft_error.has_value();
  const std::string metric = soft ? "test soft-error" : "test error";
  std::vector<svg::Panel> panels{
      {"Real vs Ideal: " + run.id, "step", metric, {real, ideal}, std::nullopt},
      {"Bootstrap gap", "step", "eps", {eps}, 0.0},
  };
  return svg::line_chart(panels);
}

inline std::string scatter_svg(const std::vector<RunData>& runs) {
  std::vector<svg::ScatterPoint> pts;
  for (const auto& run : runs) {
    const std::size_t k = run.report.eps_series.size() - 1;
    pts.push_back({gap_metric(run.ideal.records[k]), gap_metric(run.real.records[k]), run.id});
  }
  return svg::scatter(pts, "End of training", "Ideal World test soft-error", "Real World test soft-error");
}

struct ReportResult {
  std::size_t runs = 0;
  std::filesystem::path out_dir;
};

inline ReportResult generate_report(const std::filesystem::path& root) {
  const auto runs = load_runs(root);
  const auto out = root / "report";
  std::filesystem::create_directories(out / "curves");
  write_file((out / "summary.csv").string(), summary_csv(runs));
  for (const auto& run : runs) write_file((out / "curves" / (run.id + ".svg")).string(), curves_svg(run));
  write_file((out / "scatter.svg").string(), scatter_svg(runs));
  return {runs.size(), out};
}

}  // namespace deepboot
