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

#include <cmath>
#include <random>

#include "Eigen/Dense"
#include "gtest/gtest.h"
#include "test_util.h"
#include "workbench/boosting.h"
#include "workbench/gam.h"
#include "workbench/glm.h"
#include "workbench/model.h"
#include "workbench/model_io.h"
#include "workbench/status.h"
#include "workbench/tree.h"

namespace workbench {
namespace {

using testing::MakeDataset;
using testing::NumericColumn;

TrainedModel MustTrain(const Dataset& ds, ModelFamily family, uint64_t seed = 1) {
  ModelSpec spec = DefaultSpec(family);
  spec.seed = seed;
  auto m = Train(ds, spec, std::string(ModelFamilyName(family)));
  EXPECT_TRUE(m.ok()) << m.status();
  return std::move(*m);
}

std::vector<double> PredictAll(const TrainedModel& m, const Dataset& ds) {
  auto p = PredictRows(m, ds, ds.AllRows());
  EXPECT_TRUE(p.ok()) << p.status();
  return *p;
}

TEST(Glm, UnpenalizedFitMatchesNormalEquations) {
  std::mt19937_64 rng(4);
  const int n = 300;
  const auto a = testing::Normal(rng, n, 5, 2);
  const auto b = testing::Uniform(rng, n, 0, 10);
  const auto e = testing::Normal(rng, n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = 1 + 0.7 * a[i] - 0.2 * b[i] + e[i];
  const Dataset ds = MakeDataset({NumericColumn("a", a), NumericColumn("b", b)}, y,
                                 TaskKind::kRegression, n - 60);
  const TrainedModel m = MustTrain(ds, ModelFamily::kGlm);
  const int n_train = n - 60;
  Eigen::MatrixXd x(n_train, 3);
  Eigen::VectorXd yy(n_train);
  for (int i = 0; i < n_train; ++i) {
    x(i, 0) = 1;
    x(i, 1) = a[i];
    x(i, 2) = b[i];
    yy(i) = y[i];
  }
  const Eigen::VectorXd beta = (x.transpose() * x).ldlt().solve(x.transpose() * yy);
  const auto& glm = std::get<GlmModel>(m.body);
  EXPECT_NEAR(glm.intercept, beta(0), 1e-6);
  EXPECT_NEAR(glm.coefficients[0], beta(1), 1e-6);
  EXPECT_NEAR(glm.coefficients[1], beta(2), 1e-6);
}

TEST(Glm, LogisticMatchesNewtonOracle) {
  const Dataset ds = testing::BinaryFixture(600, 2);
  const TrainedModel m = MustTrain(ds, ModelFamily::kGlm);
  const auto rows = ds.RowsIn(SplitRole::kTrain);
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1;
    for (int j = 0; j < 3; ++j) x(i, j + 1) = ds.columns[j].values[rows[i]];
    y(i) = ds.columns[3].values[rows[i]];
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(4);
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd p = (x * beta).unaryExpr([](double v) { return Sigmoid(v); });
    const Eigen::VectorXd w = p.array() * (1 - p.array());
    const Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    beta += h.ldlt().solve(x.transpose() * (y - p));
  }
  const auto& glm = std::get<GlmModel>(m.body);
  EXPECT_NEAR(glm.intercept, beta(0), 1e-4);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(glm.coefficients[j], beta(j + 1), 1e-4);
}

TEST(Glm, CategoricalUsesReferenceCoding) {
  const Dataset ds = testing::RegressionFixture(500, 3);
  const TrainedModel m = MustTrain(ds, ModelFamily::kGlm);
  const auto& glm = std::get<GlmModel>(m.body);
  // x1, x2, x3 and levels b, c of g.
  ASSERT_EQ(glm.terms.size(), 5u);
  EXPECT_EQ(glm.terms[3].level, 1);
  EXPECT_EQ(glm.terms[4].level, 2);
}

TEST(ElasticNet, ObjectiveMonotoneAndAlphaMaxZeroes) {
  std::mt19937_64 rng(8);
  const int n = 200, p = 20;
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = testing::Normal(rng, 1)[0];
  Eigen::VectorXd z = 2 * x.col(0) - x.col(3);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  const double amax = ElasticNetAlphaMax(x, z, w, 0.5);
  ElasticNetOptions options;
  options.l1_ratio = 0.5;
  options.alpha = amax * (1 + 1e-9);
  const auto zero = SolveElasticNet(x, z, w, options, nullptr, nullptr);
  for (int j = 0; j < p; ++j) EXPECT_EQ(zero.beta(j), 0.0);
  options.alpha = 0.05 * amax;
  ElasticNetTrace trace;
  const auto fit = SolveElasticNet(x, z, w, options, nullptr, &trace);
  EXPECT_TRUE(trace.converged);
  for (size_t s = 1; s < trace.objective.size(); ++s) {
    EXPECT_LE(trace.objective[s], trace.objective[s - 1] + 1e-12);
  }
  EXPECT_GT(std::abs(fit.beta(0)), 0.5);
}

TEST(Gam, LargerLambdaIsSmoother) {
  const Dataset ds = testing::RegressionFixture(600, 5);
  const auto rows = ds.RowsIn(SplitRole::kTrain);
  const Rows x = ds.MakeRows(rows);
  const auto y = ds.Targets(rows);
  double last_roughness = std::numeric_limits<double>::infinity();
  double last_rss = -1;
  for (const double lambda : {1e-3, 1e-1, 10.0, 1e3}) {
    GamParams params;
    params.lambda = lambda;
    auto gam = FitGam(ds.FeatureSchema(), x, y, {}, TaskKind::kRegression, params);
    ASSERT_TRUE(gam.ok()) << gam.status();
    const double roughness = GamRoughness(*gam);
    double rss = 0;
    for (int i = 0; i < x.size(); ++i) {
      const double r = y[i] - GamMargin(*gam, x.row(i));
      rss += r * r;
    }
    EXPECT_LE(roughness, last_roughness * (1 + 1e-9) + 1e-12);
    EXPECT_GE(rss, last_rss * (1 - 1e-9));
    last_roughness = roughness;
    last_rss = rss;
  }
}

TEST(Gam, SelectsLambdaAndCentersShapes) {
  const Dataset ds = testing::RegressionFixture(500, 6);
  const TrainedModel m = MustTrain(ds, ModelFamily::kGam);
  const auto& gam = std::get<GamModel>(m.body);
  EXPECT_TRUE(gam.lambda_selected);
  EXPECT_EQ(gam.validation_losses.size(), std::size(kGamLambdaGrid));
  const auto rows = ds.RowsIn(SplitRole::kTrain);
  for (const GamShape& shape : gam.shapes) {
    double sum = 0;
    for (const int r : rows) sum += shape.Evaluate(ds.columns[shape.feature].values[r]);
    EXPECT_NEAR(sum / rows.size(), 0.0, 1e-8);
  }
}

TEST(Gam, BasisIsPartitionOfUnity) {
  const CubicBSplineBasis basis(-2, 3, {-1, 0, 0.5, 2});
  for (double x = -2; x <= 3; x += 0.173) {
    double values[4];
    basis.Evaluate(x, values);
    EXPECT_NEAR(values[0] + values[1] + values[2] + values[3], 1.0, 1e-12);
  }
}

TEST(Tree, RecoversStepFunction) {
  std::mt19937_64 rng(2);
  const int n = 400;
  const auto x1 = testing::Uniform(rng, n);
  const auto x2 = testing::Uniform(rng, n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = x1[i] > 0.3 ? 5.0 : 1.0;
  const Dataset ds = MakeDataset({NumericColumn("x1", x1), NumericColumn("x2", x2)}, y,
                                 TaskKind::kRegression, n - 40);
  const TrainedModel m = MustTrain(ds, ModelFamily::kTree);
  const auto& tree = std::get<TreeModel>(m.body);
  EXPECT_EQ(tree.nodes[0].feature, 0);
  EXPECT_NEAR(tree.nodes[0].threshold, 0.3, 0.05);
  const auto pred = PredictAll(m, ds);
  for (int i = 0; i < n - 40; ++i) EXPECT_EQ(pred[i], y[i]);
  const auto importance = TreeImpurityDecrease(tree, 2);
  EXPECT_GT(importance[0], 0);
  EXPECT_EQ(importance[1], 0);
}

TEST(Tree, RespectsMinLeafAndDepth) {
  const Dataset ds = testing::RegressionFixture(400, 7);
  ModelSpec spec = DefaultSpec(ModelFamily::kTree);
  spec.tree.max_depth = 3;
  spec.tree.min_samples_leaf = 25;
  auto m = Train(ds, spec, "t");
  ASSERT_TRUE(m.ok());
  const auto& tree = std::get<TreeModel>(m->body);
  for (const TreeNode& node : tree.nodes) {
    if (node.is_leaf()) EXPECT_GE(node.count, 25);
  }
  for (const int r : ds.AllRows()) {
    const Rows row = ds.MakeRows(std::vector<int>{r});
    EXPECT_LE(TreePath(tree, row.row(0)).size(), 4u);
  }
}

TEST(Boosting, Xgb2PurificationPreservesPredictions) {
  for (const uint64_t seed : {1, 2}) {
    const Dataset ds = testing::RegressionFixture(800, seed);
    const TrainedModel m = MustTrain(ds, ModelFamily::kXgb2, seed);
    const BoostedModel& b = std::get<Xgb2Model>(m.body).boosted;
    EXPECT_TRUE(b.effects.purified);
    EXPECT_LE(MaxWeightedMarginalMean(b.effects), 1e-8);
    for (const int r : ds.RowsIn(SplitRole::kTrain)) {
      const Rows row = ds.MakeRows(std::vector<int>{r});
      EXPECT_NEAR(b.Margin(row.row(0)), b.TreeMargin(row.row(0)), 1e-10);
    }
  }
}

TEST(Boosting, Xgb1HasNoPairsAndCenteredMains) {
  const Dataset ds = testing::RegressionFixture(600, 3);
  const TrainedModel m = MustTrain(ds, ModelFamily::kXgb1);
  const BoostedModel& b = std::get<Xgb1Model>(m.body).boosted;
  EXPECT_TRUE(b.effects.pairs.empty());
  for (const auto& tree : b.trees) EXPECT_LE(tree.nodes.size(), 3u);
  EXPECT_LE(MaxWeightedMarginalMean(b.effects), 1e-8);
}

TEST(Boosting, EarlyStoppingIsDeterministic) {
  const Dataset ds = testing::BinaryFixture(600, 4);
  const TrainedModel a = MustTrain(ds, ModelFamily::kXgb2, 9);
  const TrainedModel b = MustTrain(ds, ModelFamily::kXgb2, 9);
  EXPECT_EQ(PredictAll(a, ds), PredictAll(b, ds));
  const auto& boosted = std::get<Xgb2Model>(a.body).boosted;
  EXPECT_LE(boosted.best_rounds, boosted.params.rounds);
  for (const double p : PredictAll(a, ds)) {
    EXPECT_GT(p, 0);
    EXPECT_LT(p, 1);
  }
}

TEST(Model, TrainRejectsBadInputs) {
  Dataset ds = testing::RegressionFixture(100, 1);
  ds.prepared = false;
  EXPECT_FALSE(Train(ds, DefaultSpec(ModelFamily::kGlm), "m").ok());
  Dataset flat = testing::RegressionFixture(100, 1);
  for (double& v : flat.columns.back().values) v = 2.0;
  auto m = Train(flat, DefaultSpec(ModelFamily::kGlm), "m");
  EXPECT_FALSE(m.ok());
  EXPECT_NE(std::string(m.status().message()).find("degenerate"), std::string::npos);
  EXPECT_FALSE(ParseModelFamily("ebm").ok());
  EXPECT_NE(std::string(ParseModelFamily("ebm").status().message()).find("xgb2"),
            std::string::npos);
}

TEST(Model, RegisterScoresValidates) {
  const Dataset ds = testing::BinaryFixture(10, 1);
  std::string good = "row_id,score\n";
  for (int i = 0; i < 10; ++i) good += std::to_string(i) + "," + std::to_string(i / 10.0) + "\n";
  auto m = RegisterScores(ds, good, "ext");
  ASSERT_TRUE(m.ok()) << m.status();
  EXPECT_FALSE(m->interpretable());
  EXPECT_FALSE(m->reevaluable());
  EXPECT_EQ(PredictAll(*m, ds)[3], 0.3);
  EXPECT_FALSE(RegisterScores(ds, "row_id,score\n0,0.5\n", "x").ok());
  std::string out_of_range = good;
  out_of_range.replace(out_of_range.find("9,0.9"), 5, "9,1.5");
  EXPECT_FALSE(RegisterScores(ds, out_of_range, "x").ok());
  // Synthetic rows cannot be scored by a score table.
  Rows synthetic = ds.MakeRows(std::vector<int>{0});
  synthetic.row_ids.clear();
  auto p = Predict(*m, synthetic);
  EXPECT_TRUE(IsCapabilityError(p.status()));
}

class RoundTrip : public ::testing::TestWithParam<std::tuple<ModelFamily, TaskKind>> {};

TEST_P(RoundTrip, PredictionsSurviveSerialization) {
  const auto [family, task] = GetParam();
  const Dataset ds = task == TaskKind::kRegression ? testing::RegressionFixture(400, 2)
                                                   : testing::BinaryFixture(400, 2);
  const TrainedModel m = MustTrain(ds, family);
  auto j = ModelToJson(m);
  ASSERT_TRUE(j.ok()) << j.status();
  auto back = ModelFromJson(Json::parse(j->dump()));
  ASSERT_TRUE(back.ok()) << back.status();
  const auto a = PredictAll(m, ds);
  const auto b = PredictAll(*back, ds);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
  EXPECT_EQ(ModelSpecToJson(back->spec), ModelSpecToJson(m.spec));
}

INSTANTIATE_TEST_SUITE_P(
    Families, RoundTrip,
    ::testing::Combine(::testing::Values(ModelFamily::kGlm, ModelFamily::kGam,
                                         ModelFamily::kTree, ModelFamily::kXgb1,
                                         ModelFamily::kXgb2),
                       ::testing::Values(TaskKind::kRegression, TaskKind::kBinary)));

TEST(ModelIo, VersionAndCallableChecks) {
  const Dataset ds = testing::RegressionFixture(200, 2);
  const TrainedModel m = MustTrain(ds, ModelFamily::kGlm);
  Json j = *ModelToJson(m);
  j["schema_version"] = 99;
  auto bad = ModelFromJson(j);
  EXPECT_TRUE(absl::IsFailedPrecondition(bad.status()));
  auto callable = RegisterCallable(
      ds, [](const FeatureMatrix& x) { return std::vector<double>(x.rows(), 0.0); }, "f");
  ASSERT_TRUE(callable.ok());
  EXPECT_FALSE(ModelToJson(*callable).ok());
}

TEST(ModelIo, SpecValidationNamesTheKey) {
  auto spec = ModelSpecFromJson(ModelFamily::kGlm, Json{{"alpha", -1}}, "/models/0/params");
  ASSERT_FALSE(spec.ok());
  EXPECT_NE(std::string(spec.status().message()).find("/models/0/params/alpha"),
            std::string::npos);
  auto unknown = ModelSpecFromJson(ModelFamily::kTree, Json{{"depth", 3}}, "/p");
  ASSERT_FALSE(unknown.ok());
  EXPECT_NE(std::string(unknown.status().message()).find("/p/depth"), std::string::npos);
}

}  // namespace
}  // namespace workbench
