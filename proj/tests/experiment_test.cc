/*
 * Copyright 2026 The Workbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "test_util.h"
#include "workbench/experiment.h"
#include "workbench/parallel.h"
#include "workbench/pipeline.h"
#include "workbench/status.h"

namespace workbench {
namespace {

Experiment Populated(uint64_t seed = 7) {
  Experiment exp(seed);
  EXPECT_TRUE(exp.SetDataset(testing::RegressionFixture(300, 1), Json{{"path", "fixture"}}).ok());
  EXPECT_TRUE(TrainModel(exp, "glm", nullptr, "glm").ok());
  EXPECT_TRUE(TrainModel(exp, "tree", nullptr, "").ok());
  EXPECT_TRUE(exp.RunAnalysis({"glm"}, "diagnose", "accuracy", Json::object()).ok());
  EXPECT_TRUE(exp.RunAnalysis({"glm"}, "interpret", "global", Json::object()).ok());
  EXPECT_TRUE(exp.RunAnalysis({"glm"}, "explain", "pfi", Json{{"repeats", 2}}).ok());
  return exp;
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Experiment, GeneratedIdsAndDuplicates) {
  Experiment exp = Populated();
  EXPECT_NE(exp.FindModel("tree-1"), nullptr);
  EXPECT_EQ(absl::StatusCode::kAlreadyExists,
            TrainModel(exp, "glm", nullptr, "glm").status().code());
  EXPECT_EQ(absl::StatusCode::kFailedPrecondition,
            exp.SetDataset(testing::RegressionFixture(50, 2), Json::object()).code());
}

TEST(Experiment, RepeatedAnalysisIsStoredOnce) {
  Experiment exp = Populated();
  const size_t before = exp.results().size();
  ASSERT_TRUE(exp.RunAnalysis({"glm"}, "diagnose", "accuracy", Json::object()).ok());
  EXPECT_EQ(exp.results().size(), before);
}

TEST(Experiment, SaveLoadRoundTrip) {
  const std::string dir = testing::TempDir("exp");
  Experiment exp = Populated();
  const std::string path = dir + "/exp.json";
  ASSERT_TRUE(exp.Save(path).ok());
  auto loaded = Experiment::Load(path);
  ASSERT_TRUE(loaded.ok()) << loaded.status();
  EXPECT_EQ(*loaded->ToJson(), *exp.ToJson());
  EXPECT_EQ(*loaded->BuildReport(), *exp.BuildReport());
  // Loaded models still predict identically.
  auto again = loaded->Analyze({"glm"}, "diagnose", "accuracy", Json::object());
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again->result, exp.results()[0].result);
}

TEST(Experiment, CorruptFilesAreRejected) {
  const std::string dir = testing::TempDir("corrupt");
  Experiment exp = Populated();
  const std::string path = dir + "/exp.json";
  ASSERT_TRUE(exp.Save(path).ok());
  const std::string text = *ReadFile(path);

  ASSERT_TRUE(WriteFile(path, text.substr(0, text.size() / 2)).ok());
  auto truncated = Experiment::Load(path);
  EXPECT_EQ(truncated.status().code(), absl::StatusCode::kDataLoss);
  EXPECT_NE(std::string(truncated.status().message()).find("corrupt experiment file"),
            std::string::npos);

  Json j = Json::parse(text);
  j["schema_version"] = 0;
  ASSERT_TRUE(WriteFile(path, j.dump()).ok());
  auto old = Experiment::Load(path);
  EXPECT_EQ(old.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_NE(std::string(old.status().message()).find("migration"), std::string::npos);

  j = Json::parse(text);
  j["data"]["dataset"]["columns"][0]["values"][0] = 123.0;
  ASSERT_TRUE(WriteFile(path, j.dump()).ok());
  EXPECT_EQ(Experiment::Load(path).status().code(), absl::StatusCode::kDataLoss);

  EXPECT_EQ(Experiment::Load(dir + "/missing.json").status().code(),
            absl::StatusCode::kNotFound);
}

TEST(Experiment, DatasetJsonIsLossless) {
  Dataset ds = testing::RegressionFixture(20, 3);
  ds.columns[0].values[2] = std::numeric_limits<double>::quiet_NaN();
  ds.columns[0].missing[2] = 1;
  auto back = DatasetFromJson(DatasetToJson(ds), "/data");
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(DatasetToJson(*back), DatasetToJson(ds));
  EXPECT_TRUE(std::isnan(back->columns[0].values[2]));
}

TEST(Report, SectionsAndValidation) {
  Experiment exp = Populated();
  auto report = exp.BuildReport();
  ASSERT_TRUE(report.ok()) << report.status();
  EXPECT_EQ((*report)["report_schema_version"], kReportSchemaVersion);
  EXPECT_EQ((*report)["models"].size(), 2u);
  EXPECT_EQ((*report)["diagnostics"].size(), 1u);
  EXPECT_EQ((*report)["interpretations"].size(), 1u);
  EXPECT_EQ((*report)["explanations"].size(), 1u);
  EXPECT_FALSE(report->contains("timestamps"));
  EXPECT_TRUE(ValidateReport(*report).ok());

  Json broken = *report;
  broken["diagnostics"][0]["config_hash"] = "00";
  EXPECT_FALSE(ValidateReport(broken).ok());
  broken = *report;
  broken["diagnostics"][0]["models"] = {"nope"};
  EXPECT_FALSE(ValidateReport(broken).ok());
  broken = *report;
  broken.erase("comparisons");
  EXPECT_FALSE(ValidateReport(broken).ok());

  ReportOptions options;
  options.include_timestamps = true;
  EXPECT_TRUE(exp.BuildReport(options)->contains("timestamps"));
}

TEST(Report, EmptyExperimentIsRefused) {
  Experiment exp;
  EXPECT_EQ(exp.BuildReport().status().code(), absl::StatusCode::kFailedPrecondition);
}

TEST(ErrorEntry, CapabilityMessage) {
  const ResultEntry e = ErrorEntry({"ext"}, "interpret", "global", Json::object(),
                                   CapabilityError("registered model"));
  EXPECT_FALSE(e.ok);
  EXPECT_EQ(e.error_kind, "capability");
  EXPECT_EQ(e.error.rfind("interpret not supported: ", 0), 0u) << e.error;
  auto back = ResultEntryFromJson(ResultEntryToJson(e), "/results/0");
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(ResultEntryToJson(*back), ResultEntryToJson(e));
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::TempDir("pipeline");
    const Dataset ds = testing::RegressionFixture(400, 5);
    ASSERT_TRUE(WriteFile(dir_ + "/data.csv", testing::ToCsv(ds)).ok());
    std::string scores = "row_id,score\n";
    for (int r = 0; r < ds.num_rows(); ++r) scores += std::to_string(r) + ",0.25\n";
    ASSERT_TRUE(WriteFile(dir_ + "/scores.csv", scores).ok());
    config_ = Json::parse(R"({
      "seed": 11,
      "data": {"path": "data.csv", "target": "y", "task": "regression"},
      "prepare": {"test_ratio": 0.25},
      "models": [{"id": "gam", "family": "gam"},
                 {"id": "xgb", "family": "xgb2", "params": {"rounds": 40}},
                 {"id": "ext", "family": "registered", "scores": "scores.csv"}],
      "tests": [{"verb": "interpret", "test": "global", "models": ["gam"]},
                {"verb": "interpret", "test": "global", "models": ["ext"]},
                {"verb": "explain", "test": "shap", "models": ["xgb"],
                 "config": {"row": 3, "background_size": 20}},
                {"verb": "diagnose", "test": "weakspot", "models": ["gam"],
                 "config": {"features": ["x1"]}},
                {"verb": "diagnose", "test": "accuracy", "models": ["ext"]},
                {"verb": "compare", "test": "compare", "models": ["gam", "xgb"],
                 "config": {"tests": ["accuracy", "robustness"]}}],
      "report": "out/report.json"
    })");
  }
  std::string dir_;
  Json config_;
};

TEST_F(PipelineTest, RunsAndRecordsCapabilityErrors) {
  auto exp = RunPipeline(config_, dir_);
  ASSERT_TRUE(exp.ok()) << exp.status();
  ASSERT_EQ(exp->results().size(), 6u);
  const ResultEntry& refused = exp->results()[1];
  EXPECT_FALSE(refused.ok);
  EXPECT_EQ(refused.error_kind, "capability");
  EXPECT_EQ(refused.error.rfind("interpret not supported", 0), 0u);
  for (size_t k = 0; k < 6; ++k) {
    if (k != 1) {
      EXPECT_TRUE(exp->results()[k].ok) << k << ": " << exp->results()[k].error;
    }
  }
  auto report = ReadFile(dir_ + "/out/report.json");
  ASSERT_TRUE(report.ok());
  EXPECT_TRUE(ValidateReport(Json::parse(*report)).ok());
}

TEST_F(PipelineTest, ReportIsDeterministicAcrossRunsAndThreads) {
  const int saved = MaxThreads();
  SetMaxThreads(1);
  auto a = RunPipeline(config_, dir_);
  SetMaxThreads(4);
  auto b = RunPipeline(config_, dir_);
  SetMaxThreads(saved);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(DumpJson(*a->BuildReport()), DumpJson(*b->BuildReport()));
}

TEST_F(PipelineTest, InvalidConfigNamesThePath) {
  Json bad = config_;
  bad["models"][1]["params"]["rounds"] = "many";
  auto s = RunPipeline(bad, dir_).status();
  EXPECT_EQ(s.code(), absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(std::string(s.message()).rfind("/models/1/params/rounds", 0), 0u) << s;

  bad = config_;
  bad["tests"][0]["verb"] = "summarize";
  s = RunPipeline(bad, dir_).status();
  EXPECT_EQ(std::string(s.message()).rfind("/tests/0/verb", 0), 0u) << s;

  // Test options are checked against the data when the test runs.
  bad = config_;
  bad["tests"][3]["config"]["bins"] = -2;
  auto exp = RunPipeline(bad, dir_);
  ASSERT_TRUE(exp.ok()) << exp.status();
  EXPECT_EQ(exp->results()[3].error_kind, "invalid");
  EXPECT_EQ(exp->results()[3].error.rfind("/config/bins", 0), 0u) << exp->results()[3].error;

  bad = config_;
  bad["models"][0]["family"] = "ebm";
  s = RunPipeline(bad, dir_).status();
  EXPECT_NE(std::string(s.message()).find("supported"), std::string::npos) << s;
}

}  // namespace
}  // namespace workbench
