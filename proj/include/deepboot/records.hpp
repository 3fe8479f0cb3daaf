#pragma once

// Run records: one JSON object per evaluation step per world (JSONL), and a
// per-run summary object. Doubles are written by nlohmann/json in
// shortest-round-trip decimal form, so parsing a record gives back the exact
// same bits.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"  // nlohmann/json (vendor/)

#include "deepboot/config.hpp"
#include "deepboot/error.hpp"
#include "deepboot/metrics.hpp"

namespace deepboot {

enum class WorldTag { real, ideal };

inline const char* world_name(WorldTag w) { return w == WorldTag::real ? "real" : "ideal"; }

struct RecordHeader {
  int schema_version = kSchemaVersion;
  std::string config_hash;
  std::uint64_t seed = 0;
  WorldTag world = WorldTag::real;
  friend bool operator==(const RecordHeader&, const RecordHeader&) = default;
};

namespace detail {

inline double finite_or_throw(double v, const char* field) {
  if (!std::isfinite(v)) throw NumericalAbort(std::string("non-finite value in record field ") + field);
  return v;
}

inline double read_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw Error(std::string("record is missing numeric field ") + key);
  return j.at(key).get<double>();
}

}  // namespace detail

inline json record_to_json(const MetricsRecord& r, const RecordHeader& h) {
  using detail::finite_or_throw;
  json j;
  j["schema_version"] = h.schema_version;
  j["config_hash"] = h.config_hash;
  j["seed"] = h.seed;
  j["world"] = world_name(h.world);
  j["step"] = r.step;
  j["lr"] = finite_or_throw(r.lr, "lr");
  j["train_error"] = finite_or_throw(r.train_error, "train_error");
  if (r.train_soft_error) j["train_soft_error"] = finite_or_throw(*r.train_soft_error, "train_soft_error");
  j["train_loss"] = finite_or_throw(r.train_loss, "train_loss");
  j["test_error"] = finite_or_throw(r.test_error, "test_error");
  if (r.test_soft_error) j["test_soft_error"] = finite_or_throw(*r.test_soft_error, "test_soft_error");
  j["test_loss"] = finite_or_throw(r.test_loss, "test_loss");
  return j;
}

inline RecordHeader header_from_json(const json& j) {
  RecordHeader h;
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer())
    throw Error("record has no schema_version");
  h.schema_version = j.at("schema_version").get<int>();
  h.config_hash = j.value("config_hash", "");
  h.seed = j.value("seed", std::uint64_t{0});
  const std::string w = j.value("world", "");
  if (w != "real" && w != "ideal") throw Error("record has invalid world tag \"" + w + "\"");
  h.world = w == "real" ? WorldTag::real : WorldTag::ideal;
  return h;
}

inline MetricsRecord record_from_json(const json& j) {
  MetricsRecord r;
  if (!j.contains("step") || !j.at("step").is_number_unsigned()) throw Error("record is missing step");
  r.step = j.at("step").get<std::size_t>();
  r.lr = detail::read_number(j, "lr");
  r.train_error = detail::read_number(j, "train_error");
  if (j.contains("train_soft_error")) r.train_soft_error = detail::read_number(j, "train_soft_error");
  r.train_loss = detail::read_number(j, "train_loss");
  r.test_error = detail::read_number(j, "test_error");
  if (j.contains("test_soft_error")) r.test_soft_error = detail::read_number(j, "test_soft_error");
  r.test_loss = detail::read_number(j, "test_loss");
  return r;
}

inline std::string trajectory_to_jsonl(const Trajectory& t, const RecordHeader& h) {
  std::string out;
  for (const auto& r : t.records) {
    out += record_to_json(r, h).dump();
    out += '\n';
  }
  return out;
}

struct LoadedTrajectory {
  RecordHeader header;
  Trajectory trajectory;
};

inline LoadedTrajectory trajectory_from_jsonl(const std::string& text) {
  LoadedTrajectory out;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(std::string("malformed record line: ") + e.what());
    }
    const RecordHeader h = header_from_json(j);
    if (first) {
      out.header = h;
      first = false;
    } else if (!(h == out.header)) {
      throw Error("record file mixes headers (schema/config/seed/world)");
    }
    out.trajectory.records.push_back(record_from_json(j));
  }
  if (first) throw Error("record file is empty");
  return out;
}

inline json report_to_json(const BootstrapReport& r) {
  json j;
  j["eps_series"] = json::array();
  for (const auto& [step, eps] : r.eps_series) j["eps_series"].push_back({step, eps});
  j["t0"] = r.t0 ? json(*r.t0) : json(nullptr);
  j["report_step"] = r.report_step;
  j["t0_fallback"] = r.t0_fallback;
  j["eps_at_t0"] = r.eps_at_t0;
  j["max_abs_eps_pre_t0"] = r.max_abs_eps_pre_t0;
  j["gen_gap_at_t0"] = r.gen_gap_at_t0;
  return j;
}

inline BootstrapReport report_from_json(const json& j) {
  BootstrapReport r;
  for (const auto& e : j.at("eps_series")) r.eps_series.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<double>());
  if (!j.at("t0").is_null()) r.t0 = j.at("t0").get<std::size_t>();
  r.report_step = j.at("report_step").get<std::size_t>();
  r.t0_fallback = j.at("t0_fallback").get<bool>();
  r.eps_at_t0 = j.at("eps_at_t0").get<double>();
  r.max_abs_eps_pre_t0 = j.at("max_abs_eps_pre_t0").get<double>();
  r.gen_gap_at_t0 = j.at("gen_gap_at_t0").get<double>();
  return r;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << contents;
  if (!out) throw Error("write failed for " + path);
}

}  // namespace deepboot
