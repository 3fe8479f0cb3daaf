#include <gtest/gtest.h>

#include <filesystem>
#include <limits>

#include "deepboot/config.hpp"
#include "deepboot/experiment.hpp"
#include "deepboot/records.hpp"
#include "deepboot/report.hpp"

namespace deepboot {
namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "name": "mini",
  "oracle": {"kind": "teacher", "input_dim": 8, "hidden": [16]},
  "n": 64,
  "model": {"hidden": [16], "head": {"kind": "softmax_xent", "classes": 2}},
  "optimizer": {"kind": "sgd", "momentum": 0.9, "lr": 0.05, "batch_size": 16, "schedule": {"kind": "cosine"}},
  "steps": 30,
  "eval_every": 10,
  "eval_samples": 500,
  "seeds": [0, 1]
})";

json minimal() { return json::parse(kMinimal); }

std::string error_path(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

TEST(Config, MinimalParsesWithDefaults) {
  const auto c = parse_config(minimal());
  EXPECT_EQ(c.name, "mini");
  EXPECT_EQ(c.model.input_dim, 8u);
  EXPECT_EQ(c.stop_threshold, 0.01);
  EXPECT_EQ(c.real_sampling, RealSampling::epoch_shuffle);
  EXPECT_TRUE(std::holds_alternative<NoAugmentation>(c.augmentation));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1}));
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, MissingRequiredFieldsNamePath) {
  for (const char* key : {"schema_version", "name", "oracle", "n", "model", "optimizer", "steps", "seeds"}) {
    auto j = minimal();
    j.erase(key);
    EXPECT_EQ(error_path(j), key);
  }
  auto j = minimal();
  j["optimizer"].erase("lr");
  EXPECT_EQ(error_path(j), "optimizer.lr");
  j = minimal();
  j["model"].erase("head");
  EXPECT_EQ(error_path(j), "model.head");
}

TEST(Config, UnknownKeysRejectedWithPath) {
  auto j = minimal();
  j["stepz"] = 3;
  EXPECT_EQ(error_path(j), "stepz");
  j = minimal();
  j["optimizer"]["schedule"]["warmup"] = 10;
  EXPECT_EQ(error_path(j), "optimizer.schedule.warmup");
  j = minimal();
  j["oracle"]["colour"] = "red";
  EXPECT_EQ(error_path(j), "oracle.colour");
}

TEST(Config, TypeErrorsNamePath) {
  auto j = minimal();
  j["n"] = -3;
  EXPECT_EQ(error_path(j), "n");
  j = minimal();
  j["seeds"][1] = "x";
  EXPECT_EQ(error_path(j), "seeds[1]");
  j = minimal();
  j["schema_version"] = 2;
  EXPECT_EQ(error_path(j), "schema_version");
  j = minimal();
  j["augmentation"] = {{"kind", "coord_dropout"}, {"p", 1.5}};
  EXPECT_EQ(error_path(j), "augmentation.p");
}

TEST(Config, MalformedJson) {
  EXPECT_THROW(parse_config_text("{\"schema_version\": 1,"), ConfigError);
}

TEST(Config, SemanticValidation) {
  auto c = parse_config(minimal());
  c.model.head = SoftmaxXent{1};
  EXPECT_THROW(validate(c), ConfigError);
  c = parse_config(minimal());
  c.steps = 0;
  EXPECT_THROW(validate(c), ConfigError);
}

ExperimentConfig full_config() {
  auto j = minimal();
  j["oracle"] = {{"kind", "random_label"},
                 {"classes", 10},
                 {"base", {{"kind", "pool"}, {"size", 50}, {"seed", 4}, {"base", {{"kind", "teacher"}, {"input_dim", 8}}}}}};
  j["eval_oracle"] = {{"kind", "gaussian_linear"}, {"dim", 8 + 4}, {"activation", "sign"}};
  j["model"]["head"] = {{"kind", "softmax_xent"}, {"classes", 10}};
  j["model"]["bias"] = false;
  j["optimizer"] = {{"kind", "adam"}, {"lr", 0.001}, {"batch_size", 8}, {"beta2", 0.99},
                    {"schedule", {{"kind", "step_drop"}, {"milestones", {0.25, 0.5, 0.75}}}}};
  j["augmentation"] = {{"kind", "gaussian_noise"}, {"sigma", 0.1}};
  j["real_sampling"] = "with_replacement";
  j["stop_threshold"] = 0.02;
  j["sweep"] = {{"n", {10, 20}},
                {"lr", {0.1, 0.01, 0.001}},
                {"augmentation", {{{"kind", "none"}}, {{"kind", "coord_dropout"}, {"p", 0.2}}}},
                {"optimizer", {{{"kind", "gd"}}, {{"kind", "sgd"}, {"momentum", 0.5}}}}};
  j["output_dir"] = "elsewhere";
  return parse_config(j);
}

TEST(Config, EmitParseRoundTrip) {
  for (const auto& c : {parse_config(minimal()), full_config()}) {
    const json emitted = emit_config(c);
    const auto back = parse_config(emitted);
    EXPECT_EQ(back, c);
    EXPECT_EQ(emit_config(back).dump(), emitted.dump());
    EXPECT_EQ(parse_config_text(emitted.dump(2)), c);
  }
}

TEST(Config, RoundTripProperty) {
  // Randomized configs over the numeric fields.
  RngStream r(99);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = parse_config(minimal());
    c.n = 1 + r.below(100000);
    c.optimizer.base_lr = r.uniform(1e-6, 2.0);
    c.stop_threshold = r.uniform(1e-4, 0.5);
    c.steps = 1 + r.below(1u << 20);
    c.augmentation = GaussianNoise{r.uniform(0.0, 3.0)};
    c.seeds = {r.next_u64(), r.below(10)};
    c.sweep.lr = {r.uniform(0.0, 1.0) / 3.0};
    ASSERT_EQ(parse_config(emit_config(c)), c);
  }
}

TEST(Config, SweepExpansionOrderAndCount) {
  const auto c = full_config();
  const auto pts = expand_sweep(c);
  ASSERT_EQ(pts.size(), 2u * 3u * 2u * 2u);
  EXPECT_EQ(pts[0].n, 10u);
  EXPECT_EQ(pts.back().n, 20u);
  EXPECT_TRUE(std::holds_alternative<PlainGd>(pts[0].optimizer));
  EXPECT_TRUE(std::holds_alternative<Sgd>(pts[1].optimizer));
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(pts[i].index, i);
  EXPECT_EQ(expand_sweep(parse_config(minimal())).size(), 1u);
}

TEST(Config, PointConfigIsSingleSeedSinglePoint) {
  const auto c = full_config();
  const auto p = expand_sweep(c)[5];
  const auto s = point_config(c, p, 7);
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{7}));
  EXPECT_EQ(s.sweep, SweepAxes{});
  EXPECT_EQ(s.n, p.n);
  EXPECT_EQ(s.optimizer.base_lr, p.lr);
}

TEST(Config, HashStableAndSensitive) {
  const auto a = parse_config(minimal());
  auto b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.n += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, BuildOracleKinds) {
  const auto c = full_config();
  const auto o = build_oracle(c.oracle);
  EXPECT_EQ(o.input_dim(), 8u);
  EXPECT_EQ(o.label_info().classes, 10u);
  const auto e = build_oracle(*c.eval_oracle);
  EXPECT_EQ(e.label_info().kind, LabelInfo::Kind::sign);
}

MetricsRecord sample_record(std::size_t step) {
  MetricsRecord r;
  r.step = step;
  r.lr = 0.1 / 3.0;
  r.train_error = 0.125;
  r.train_soft_error = 1.0 / 7.0;
  r.train_loss = 0.6931471805599453;
  r.test_error = 0.3;
  r.test_soft_error = 0.1 + 0.2;
  r.test_loss = 1e-300;
  return r;
}

TEST(Records, JsonlRoundTripIsExact) {
  Trajectory t;
  for (std::size_t s = 0; s < 5; ++s) t.records.push_back(sample_record(s * 10));
  t.records[2].train_soft_error.reset();
  t.records[2].test_soft_error.reset();
  const RecordHeader h{kSchemaVersion, "00ff00ff00ff00ff", 42, WorldTag::ideal};
  const std::string text = trajectory_to_jsonl(t, h);
  const auto back = trajectory_from_jsonl(text);
  EXPECT_EQ(back.header, h);
  EXPECT_EQ(back.trajectory.records, t.records);
  EXPECT_EQ(trajectory_to_jsonl(back.trajectory, back.header), text);
}

TEST(Records, NonFiniteValuesRefused) {
  auto r = sample_record(0);
  r.test_loss = std::numeric_limits<double>::infinity();
  EXPECT_THROW(record_to_json(r, {}), NumericalAbort);
}

TEST(Records, MixedHeadersAndEmptyFilesRejected) {
  Trajectory t;
  t.records = {sample_record(0)};
  const auto a = trajectory_to_jsonl(t, {kSchemaVersion, "aa", 1, WorldTag::real});
  const auto b = trajectory_to_jsonl(t, {kSchemaVersion, "aa", 2, WorldTag::real});
  EXPECT_THROW(trajectory_from_jsonl(a + b), Error);
  EXPECT_THROW(trajectory_from_jsonl(""), Error);
  EXPECT_THROW(trajectory_from_jsonl("{not json\n"), Error);
}

TEST(Records, ReportRoundTrip) {
  BootstrapReport r;
  r.eps_series = {{0, 0.0}, {10, -0.015}, {20, 0.0625}};
  r.t0 = 20;
  r.report_step = 20;
  r.eps_at_t0 = 0.0625;
  r.max_abs_eps_pre_t0 = 0.0625;
  r.gen_gap_at_t0 = 0.25;
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
  r.t0.reset();
  r.t0_fallback = true;
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
}

class ExperimentDir : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = std::filesystem::temp_directory_path() /
            ("deepboot_cfg_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(root_);
  }
  void TearDown() override { std::filesystem::remove_all(root_); }
  std::filesystem::path root_;
};

TEST_F(ExperimentDir, RunWritesRecordsAndReportIsIdempotent) {
  const auto c = parse_config(minimal());
  const auto res = run_experiment(c, root_);
  ASSERT_EQ(res.runs.size(), 2u);
  EXPECT_FALSE(res.any_aborted());
  const auto dir = root_ / "mini";
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
  for (const auto& r : res.runs) {
    EXPECT_TRUE(std::filesystem::exists(r.dir / "real.jsonl"));
    EXPECT_TRUE(std::filesystem::exists(r.dir / "ideal.jsonl"));
    EXPECT_TRUE(std::filesystem::exists(r.dir / "summary.json"));
  }
  const auto first = generate_report(dir);
  EXPECT_EQ(first.runs, 2u);
  const std::string csv1 = read_file((dir / "report" / "summary.csv").string());
  const std::string svg1 = read_file((dir / "report" / "scatter.svg").string());
  generate_report(dir);
  EXPECT_EQ(read_file((dir / "report" / "summary.csv").string()), csv1);
  EXPECT_EQ(read_file((dir / "report" / "scatter.svg").string()), svg1);
  // Header plus one row per run.
  EXPECT_EQ(std::count(csv1.begin(), csv1.end(), '\n'), 3);
  EXPECT_NE(svg1.find("class=\"diagonal\""), std::string::npos);
}

TEST_F(ExperimentDir, RecomputedReportMatchesStoredSummary) {
  const auto c = parse_config(minimal());
  run_experiment(c, root_);
  for (const auto& run : load_runs(root_ / "mini"))
    EXPECT_EQ(run.report, report_from_json(run.summary.at("report")));
}

TEST_F(ExperimentDir, ParallelJobsMatchSerial) {
  const auto c = parse_config(minimal());
  run_experiment(c, root_ / "a", 0, 1);
  run_experiment(c, root_ / "b", 0, 3);
  for (const char* f : {"point_0/seed_0/real.jsonl", "point_0/seed_1/ideal.jsonl", "point_0/seed_1/summary.json"})
    EXPECT_EQ(read_file((root_ / "a" / "mini" / f).string()), read_file((root_ / "b" / "mini" / f).string())) << f;
}

TEST_F(ExperimentDir, ReportOnEmptyDirectoryFails) {
  std::filesystem::create_directories(root_);
  EXPECT_THROW(generate_report(root_), Error);
}

}  // namespace
}  // namespace deepboot
