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

#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"
#include "workbench/cli.h"
#include "workbench/experiment.h"
#include "workbench/pipeline.h"
#include "workbench/service.h"
#include "workbench/status.h"

namespace workbench {
namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "workbench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun run;
  run.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  run.out = out.str();
  run.err = err.str();
  return run;
}

class FrontendTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::TempDir("frontend");
    const Dataset ds = testing::RegressionFixture(300, 21);
    ASSERT_TRUE(WriteFile(dir_ + "/data.csv", testing::ToCsv(ds)).ok());
    std::string scores = "row_id,score\n";
    for (int r = 0; r < ds.num_rows(); ++r) scores += std::to_string(r) + ",0.5\n";
    ASSERT_TRUE(WriteFile(dir_ + "/scores.csv", scores).ok());
    exp_ = dir_ + "/exp.json";
  }
  CliRun Train(const std::string& family, const std::string& id) {
    return Cli({"--experiment", exp_, "--seed", "3", "train", "--data", dir_ + "/data.csv",
                "--target", "y", "--task", "regression", "--model", family, "--id", id});
  }
  std::string dir_;
  std::string exp_;
};

TEST_F(FrontendTest, CliExitCodes) {
  const CliRun trained = Train("glm", "glm");
  ASSERT_EQ(trained.code, kExitOk) << trained.err;
  EXPECT_EQ(trained.out, "glm\n");

  const CliRun unknown = Cli({"--experiment", exp_, "train", "--model", "ebm"});
  EXPECT_EQ(unknown.code, kExitUsage);
  EXPECT_NE(unknown.err.find("glm"), std::string::npos) << unknown.err;
  EXPECT_NE(unknown.err.find("xgb2"), std::string::npos) << unknown.err;

  EXPECT_EQ(Cli({"--bogus"}).code, kExitUsage);
  EXPECT_EQ(Cli({"--experiment", exp_, "data", "load", "--data", dir_ + "/absent.csv",
                 "--target", "y"})
                .code,
            kExitData);

  const CliRun reg = Cli({"--experiment", exp_, "register", "--scores", dir_ + "/scores.csv",
                          "--id", "ext"});
  ASSERT_EQ(reg.code, kExitOk) << reg.err;
  const CliRun refused = Cli({"--experiment", exp_, "interpret", "--model", "ext"});
  EXPECT_EQ(refused.code, kExitExecution);
  EXPECT_NE(refused.err.find("interpret not supported"), std::string::npos) << refused.err;
  EXPECT_EQ(Cli({"--experiment", exp_, "explain", "--model", "ext", "--method", "pfi"}).code,
            kExitExecution);

  const CliRun ok = Cli({"--experiment", exp_, "diagnose", "--model", "glm", "--test",
                         "weakspot", "--slice-feature", "x1"});
  ASSERT_EQ(ok.code, kExitOk) << ok.err;
  const Json entry = Json::parse(ok.out);
  EXPECT_EQ(entry["status"], "ok");
  EXPECT_EQ(entry["config"]["features"], Json::array({"x1"}));

  const std::string report = dir_ + "/report.json";
  ASSERT_EQ(Cli({"--experiment", exp_, "--out", report, "report"}).code, kExitOk);
  EXPECT_TRUE(ValidateReport(Json::parse(*ReadFile(report))).ok());
}

TEST_F(FrontendTest, CliAndServiceAgree) {
  ASSERT_EQ(Train("gam", "gam").code, kExitOk);
  auto exp = Experiment::Load(exp_);
  ASSERT_TRUE(exp.ok()) << exp.status();
  Service service(std::move(*exp));

  const CliRun cli = Cli({"--experiment", exp_, "explain", "--model", "gam", "--method", "ale",
                          "--feature", "x2", "--bins", "8"});
  ASSERT_EQ(cli.code, kExitOk) << cli.err;

  const HttpResponse submitted = service.Handle(
      "POST", "/api/explain", R"({"model": "gam", "test": "ale", "config": {"feature": "x2", "bins": 8}})");
  ASSERT_EQ(submitted.status, 202) << submitted.body;
  const std::string job = submitted.body["job_id"];
  ASSERT_TRUE(service.WaitForJob(job));
  const HttpResponse polled = service.Handle("GET", "/api/jobs/" + job, "");
  ASSERT_EQ(polled.status, 200);
  EXPECT_EQ(polled.body["status"], "done");
  EXPECT_EQ(polled.body["result"], Json::parse(cli.out));
}

TEST_F(FrontendTest, ServiceRoutesAndErrors) {
  Service service(Experiment(5));
  EXPECT_EQ(service.Handle("GET", "/api/spec", "").body["openapi"].get<std::string>().substr(0, 2),
            "3.");
  EXPECT_EQ(service.Handle("GET", "/api/report", "").status, 409);

  HttpResponse r = service.Handle("POST", "/api/data/load",
                                  Json{{"path", dir_ + "/data.csv"}, {"target", "y"}, {"task", "regression"}}.dump());
  ASSERT_EQ(r.status, 200) << r.body;
  r = service.Handle("POST", "/api/data/prepare", R"({"test_ratio": 0.3})");
  ASSERT_EQ(r.status, 200) << r.body;

  r = service.Handle("POST", "/api/data/prepare", R"({"test_ratio": "big"})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["error"]["field"], "/test_ratio");
  EXPECT_EQ(service.Handle("POST", "/api/data/prepare", "{not json").status, 400);

  r = service.Handle("POST", "/api/models/train", R"({"family": "tree", "id": "t"})");
  ASSERT_EQ(r.status, 202) << r.body;
  ASSERT_TRUE(service.WaitForJob(r.body["job_id"]));
  r = service.Handle("GET", "/api/jobs/" + r.body["job_id"].get<std::string>(), "");
  EXPECT_EQ(r.body["status"], "done");
  EXPECT_EQ(r.body["result"]["model_id"], "t");

  r = service.Handle("POST", "/api/models/register",
                     Json{{"scores", dir_ + "/scores.csv"}, {"id", "ext"}}.dump());
  EXPECT_EQ(r.status, 201) << r.body;
  r = service.Handle("POST", "/api/interpret", R"({"model": "ext"})");
  EXPECT_EQ(r.status, 422);
  EXPECT_NE(r.body["error"]["message"].get<std::string>().find("interpret not supported"),
            std::string::npos);
  EXPECT_EQ(service.Handle("POST", "/api/explain", R"({"model": "ext", "test": "shap"})").status,
            422);

  EXPECT_EQ(service.Handle("GET", "/api/jobs/job-999", "").status, 404);
  EXPECT_EQ(service.Handle("GET", "/api/models/none", "").status, 404);
  EXPECT_EQ(service.Handle("POST", "/api/diagnose/astrology", R"({"model": "t"})").status, 404);
  EXPECT_EQ(service.Handle("GET", "/api/nowhere", "").status, 404);
  EXPECT_EQ(service.Handle("GET", "/api/models", "").body.size(), 2u);

  r = service.Handle("POST", "/api/diagnose/accuracy", R"({"model": "t"})");
  ASSERT_EQ(r.status, 202);
  ASSERT_TRUE(service.WaitForJob(r.body["job_id"]));
  r = service.Handle("GET", "/api/report", "");
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_TRUE(ValidateReport(r.body).ok());
}

TEST_F(FrontendTest, ConcurrentMutationIsRejected) {
  Service service(Experiment(5));
  ASSERT_EQ(service.Handle("POST", "/api/data/load",
                           Json{{"path", dir_ + "/data.csv"}, {"target", "y"}, {"task", "regression"}}.dump())
                .status,
            200);
  ASSERT_EQ(service.Handle("POST", "/api/data/prepare", "{}").status, 200);
  const HttpResponse first = service.Handle(
      "POST", "/api/models/train", R"({"family": "xgb2", "params": {"rounds": 3000, "early_stopping": false}})");
  ASSERT_EQ(first.status, 202);
  const HttpResponse second =
      service.Handle("POST", "/api/models/train", R"({"family": "glm"})");
  EXPECT_EQ(second.status, 409);
  ASSERT_TRUE(service.WaitForJob(first.body["job_id"]));
  EXPECT_EQ(service.Handle("POST", "/api/models/train", R"({"family": "glm"})").status, 202);
}

TEST(HttpStatus, Mapping) {
  EXPECT_EQ(HttpStatusFor(CapabilityError("x")), 422);
  EXPECT_EQ(HttpStatusFor(absl::InvalidArgumentError("x")), 400);
  EXPECT_EQ(HttpStatusFor(absl::NotFoundError("x")), 404);
  EXPECT_EQ(HttpStatusFor(absl::FailedPreconditionError("x")), 409);
  EXPECT_EQ(HttpStatusFor(absl::InternalError("x")), 500);
  const Json body = ErrorBody(400, absl::InvalidArgumentError("/a/b: bad"));
  EXPECT_EQ(body["error"]["field"], "/a/b");
}

}  // namespace
}  // namespace workbench
