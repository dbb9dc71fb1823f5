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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gtest/gtest.h"
#include "test_util.h"
#include "workbench/compare.h"
#include "workbench/diagnose.h"
#include "workbench/explain.h"
#include "workbench/interpret.h"
#include "workbench/stats.h"
#include "workbench/status.h"

namespace workbench {
namespace {

using testing::CategoricalColumn;
using testing::MakeDataset;
using testing::NumericColumn;

TrainedModel MustTrain(const Dataset& ds, ModelFamily family, uint64_t seed = 1) {
  ModelSpec spec = DefaultSpec(family);
  spec.seed = seed;
  auto m = Train(ds, spec, std::string(ModelFamilyName(family)));
  EXPECT_TRUE(m.ok()) << m.status();
  return std::move(*m);
}

std::vector<double> Row(const Dataset& ds, int r) {
  const Rows rows = ds.MakeRows(std::vector<int>{r});
  return {rows.row(0).begin(), rows.row(0).end()};
}

// Linear callable over all features.
TrainedModel Linear(const Dataset& ds, std::vector<double> beta, double b0 = 0) {
  auto m = RegisterCallable(
      ds,
      [beta, b0](const FeatureMatrix& x) {
        std::vector<double> out(x.rows(), b0);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
          for (size_t j = 0; j < beta.size(); ++j) out[i] += beta[j] * x(i, j);
        return out;
      },
      "linear");
  return std::move(*m);
}

class LocalAdditivity : public ::testing::TestWithParam<std::tuple<ModelFamily, TaskKind>> {};

TEST_P(LocalAdditivity, ContributionsSumToScore) {
  const auto [family, task] = GetParam();
  const Dataset ds = task == TaskKind::kRegression ? testing::RegressionFixture(500, 4)
                                                   : testing::BinaryFixture(500, 4);
  const TrainedModel m = MustTrain(ds, family);
  for (const int r : {0, 7, 450}) {
    auto local = InterpretLocal(m, Row(ds, r));
    ASSERT_TRUE(local.ok()) << local.status();
    double sum = local->base;
    for (const double c : local->contributions) sum += c;
    for (const auto& p : local->pair_contributions) sum += p.value;
    EXPECT_NEAR(sum, local->score, 1e-9);
    const Rows row = ds.MakeRows(std::vector<int>{r});
    const double expected = family == ModelFamily::kTree ? (*Predict(m, row))[0]
                                                         : (*PredictMargin(m, row))[0];
    EXPECT_NEAR(local->score, expected, 1e-9);
  }
  auto global = InterpretGlobal(m, ds);
  ASSERT_TRUE(global.ok()) << global.status();
  double total = std::accumulate(global->importance.begin(), global->importance.end(), 0.0);
  for (const auto& p : global->pairs) total += p.importance;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(
    Families, LocalAdditivity,
    ::testing::Combine(::testing::Values(ModelFamily::kGlm, ModelFamily::kGam,
                                         ModelFamily::kTree, ModelFamily::kXgb1,
                                         ModelFamily::kXgb2),
                       ::testing::Values(TaskKind::kRegression, TaskKind::kBinary)));

TEST(Interpret, RegisteredModelsAreRejected) {
  const Dataset ds = testing::RegressionFixture(100, 1);
  const TrainedModel m = Linear(ds, {1, 1, 1, 0});
  auto g = InterpretGlobal(m, ds);
  EXPECT_TRUE(IsCapabilityError(g.status()));
  EXPECT_NE(std::string(g.status().message()).find("registered model"), std::string::npos);
}

TEST(Interpret, TreePathDescribesTheInstance) {
  const Dataset ds = testing::RegressionFixture(400, 5);
  const TrainedModel m = MustTrain(ds, ModelFamily::kTree);
  auto local = InterpretLocal(m, Row(ds, 3));
  ASSERT_TRUE(local.ok());
  ASSERT_FALSE(local->path.empty());
  for (const PathCondition& c : local->path) {
    if (c.op == "<=") EXPECT_LE(c.value, c.threshold);
    if (c.op == ">") EXPECT_GT(c.value, c.threshold);
  }
}

TEST(Explain, PdpOfAdditiveModelIsShiftedShape) {
  const Dataset ds = testing::RegressionFixture(400, 2);
  const TrainedModel m = Linear(ds, {2, -1, 0.5, 0});
  auto pdp = Pdp(m, ds, "x1", {});
  ASSERT_TRUE(pdp.ok()) << pdp.status();
  ASSERT_GE(pdp->grid.size(), 2u);
  for (size_t g = 1; g < pdp->grid.size(); ++g) {
    EXPECT_NEAR((pdp->values[g] - pdp->values[g - 1]) / (pdp->grid[g] - pdp->grid[g - 1]), 2.0,
                1e-9);
  }
  int total = std::accumulate(pdp->counts.begin(), pdp->counts.end(), 0);
  EXPECT_EQ(total, static_cast<int>(ds.RowsIn(SplitRole::kTest).size()));
  auto cat = Pdp(m, ds, "g", {});
  ASSERT_TRUE(cat.ok());
  EXPECT_EQ(cat->levels.size(), 3u);
  EXPECT_NEAR(cat->values[2] - cat->values[0], 0.0, 1e-12);
  auto surface = Pdp2(m, ds, "x1", "x2", {});
  ASSERT_TRUE(surface.ok());
  EXPECT_FALSE(Pdp2(m, ds, "x1", "g", {}).ok());
}

TEST(Explain, AleIsCenteredWithSlopeBeta) {
  const Dataset ds = testing::RegressionFixture(600, 3);
  const TrainedModel m = Linear(ds, {2, -1, 0.5, 0});
  auto ale = Ale(m, ds, "x2", {});
  ASSERT_TRUE(ale.ok()) << ale.status();
  for (size_t k = 1; k < ale->edges.size(); ++k) {
    EXPECT_NEAR((ale->values[k] - ale->values[k - 1]) / (ale->edges[k] - ale->edges[k - 1]),
                -1.0, 1e-9);
  }
  double weighted = 0;
  int n = 0;
  for (size_t k = 0; k < ale->bin_values.size(); ++k) {
    weighted += ale->counts[k] * ale->bin_values[k];
    n += ale->counts[k];
  }
  EXPECT_NEAR(weighted / n, 0.0, 1e-12);
  EXPECT_EQ(n, static_cast<int>(ds.RowsIn(SplitRole::kTrain).size()));
}

TEST(Explain, LimeRecoversLinearCoefficients) {
  const Dataset ds = testing::RegressionFixture(500, 4);
  const TrainedModel m = Linear(ds, {2, -1, 0.5, 0}, 3);
  LimeOptions options;
  options.seed = 5;
  auto lime = Lime(m, ds, Row(ds, 10), options);
  ASSERT_TRUE(lime.ok()) << lime.status();
  EXPECT_GT(lime->r2, 0.99);
  for (size_t k = 0; k < lime->features.size(); ++k) {
    if (lime->features[k] == "x1") EXPECT_NEAR(lime->coefficients[k], 2.0, 1e-2);
    if (lime->features[k] == "x2") EXPECT_NEAR(lime->coefficients[k], -1.0, 1e-2);
  }
  auto again = Lime(m, ds, Row(ds, 10), options);
  EXPECT_EQ(again->coefficients, lime->coefficients);
}

TEST(Explain, KernelShapApproximatesExact) {
  // 13 features forces the sampled estimator.
  std::mt19937_64 rng(6);
  std::vector<Column> cols;
  for (int j = 0; j < 13; ++j) {
    cols.push_back(NumericColumn("f" + std::to_string(j), testing::Normal(rng, 200)));
  }
  const Dataset ds = MakeDataset(cols, testing::Normal(rng, 200), TaskKind::kRegression, 160);
  std::vector<double> beta(13);
  for (int j = 0; j < 13; ++j) beta[j] = 0.3 * (j - 6);
  const TrainedModel m = Linear(ds, beta);
  ShapOptions options;
  options.seed = 2;
  options.background_size = 50;
  auto shap = Shap(m, ds, Row(ds, 170), options);
  ASSERT_TRUE(shap.ok()) << shap.status();
  EXPECT_FALSE(shap->exact);
  double sum = shap->base;
  for (const double v : shap->values) sum += v;
  EXPECT_NEAR(sum, shap->prediction, 1e-8);
  // Linear model: phi_j = beta_j (x_j - background mean), recovered exactly by
  // the regression as the model is additive.
  std::vector<double> mean(13, 0.0);
  for (const int64_t r : shap->background_rows) {
    for (int j = 0; j < 13; ++j) mean[j] += ds.columns[j].values[r] / shap->background_rows.size();
  }
  const auto x = Row(ds, 170);
  for (int j = 0; j < 13; ++j) EXPECT_NEAR(shap->values[j], beta[j] * (x[j] - mean[j]), 1e-6);
}

TEST(Explain, PseudoModelsAreRejected) {
  const Dataset ds = testing::BinaryFixture(20, 1);
  std::string csv = "row_id,score\n";
  for (int i = 0; i < 20; ++i) csv += std::to_string(i) + ",0.5\n";
  const TrainedModel m = *RegisterScores(ds, csv, "ext");
  EXPECT_TRUE(IsCapabilityError(Pfi(m, ds, {}).status()));
  EXPECT_TRUE(IsCapabilityError(Shap(m, ds, Row(ds, 0), {}).status()));
}

TEST(Explain, PfiIsSeededAndSignedAsDegradation) {
  const Dataset ds = testing::RegressionFixture(400, 8);
  const TrainedModel m = Linear(ds, {2, -1, 0, 0});
  PfiOptions options;
  options.seed = 3;
  auto a = Pfi(m, ds, options);
  auto b = Pfi(m, ds, options);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->features[0].degradations, b->features[0].degradations);
  EXPECT_GT(a->features[0].mean, a->features[1].mean);
  EXPECT_EQ(a->features[2].mean, 0.0);
  // Score metrics are flipped so that larger still means more important.
  options.metric = Metric::kR2;
  auto r2 = Pfi(m, ds, options);
  ASSERT_TRUE(r2.ok());
  EXPECT_GT(r2->features[0].mean, 0);
}

TEST(Diagnose, ConformalRankFormula) {
  EXPECT_EQ(*ConformalRank(2000, 0.1), 1801);
  EXPECT_EQ(*ConformalRank(9, 0.1), 9);
  EXPECT_EQ(*ConformalRank(19, 0.05), 19);
  EXPECT_FALSE(ConformalRank(8, 0.1).ok());
}

TEST(Diagnose, WeakspotFlagsTheNoisyRegion) {
  std::mt19937_64 rng(5);
  const int n = 2000;
  const auto x = testing::Uniform(rng, n);
  const auto e = testing::Normal(rng, n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = x[i] + (x[i] > 0.6 ? 2.0 : 0.1) * e[i];
  const Dataset ds = MakeDataset({NumericColumn("x", x)}, y, TaskKind::kRegression, 1000);
  const TrainedModel m = Linear(ds, {1});
  SliceSpec spec;
  spec.features = {"x"};
  spec.binning = SliceBinning::kUniform;
  spec.bins = 10;
  auto ws = Weakspot(m, ds, spec);
  ASSERT_TRUE(ws.ok()) << ws.status();
  ASSERT_EQ(ws->slices.size(), 10u);
  for (int b = 0; b < 10; ++b) EXPECT_EQ(ws->slices[b].weak, b >= 8) << b;
  ASSERT_EQ(ws->regions.size(), 1u);
  EXPECT_EQ(ws->regions[0].first_bin, 8);
  EXPECT_EQ(ws->regions[0].last_bin, 9);
}

TEST(Diagnose, OverfitDetectsMemorizedRegion) {
  const Dataset ds = testing::RegressionFixture(1000, 9);
  const TrainedModel m = MustTrain(ds, ModelFamily::kTree);
  SliceSpec spec;
  spec.features = {"x1"};
  auto of = OverfitUnderfit(m, ds, spec);
  ASSERT_TRUE(of.ok()) << of.status();
  EXPECT_EQ(of->slices.size(), 10u);
  for (const OverfitCell& c : of->slices) {
    if (c.skipped) continue;
    EXPECT_NEAR(c.gap, c.test_metric - c.train_metric, 1e-15);
    EXPECT_EQ(c.overfit, c.gap >= of->delta);
  }
}

TEST(Diagnose, RobustnessZeroScaleIsBaseline) {
  const Dataset ds = testing::RegressionFixture(500, 10);
  const TrainedModel m = MustTrain(ds, ModelFamily::kGam);
  auto r = Robustness(m, ds, {});
  ASSERT_TRUE(r.ok()) << r.status();
  ASSERT_EQ(r->points[0].scale, 0.0);
  for (const double v : r->points[0].values) EXPECT_EQ(v, r->baseline);
  EXPECT_GT(r->points.back().mean, r->baseline);
  EXPECT_EQ(r->features, (std::vector<std::string>{"x1", "x2", "x3"}));
}

TEST(Diagnose, ResilienceWorstSampleCurveIsMonotone) {
  const Dataset ds = testing::RegressionFixture(1000, 11);
  const TrainedModel m = MustTrain(ds, ModelFamily::kGlm);
  auto r = Resilience(m, ds, {});
  ASSERT_TRUE(r.ok()) << r.status();
  for (size_t k = 1; k < r->points.size(); ++k) {
    EXPECT_GE(*r->points[k].metric, *r->points[k - 1].metric - 1e-12);
  }
  EXPECT_NEAR(*r->points[0].metric, r->baseline, 1e-12);
  ResilienceOptions cluster;
  cluster.scenario = ResilienceScenario::kWorstCluster;
  auto c = Resilience(m, ds, cluster);
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_GE(c->worst_cluster, 0);
  ResilienceOptions outer;
  outer.scenario = ResilienceScenario::kOuterSample;
  EXPECT_TRUE(Resilience(m, ds, outer).ok());
}

TEST(Diagnose, RetainedCurveOnSmallFixture) {
  std::vector<double> y(40), s(40, 0.0);
  for (int i = 0; i < 40; ++i) y[i] = i % 8 == 0 ? 10.0 : 0.0;  // 5 large errors
  const auto order = WorstSampleOrder(TaskKind::kRegression, y, s);
  const std::vector<double> ratios = {1.0, 0.5, 0.125};
  const auto curve = RetainedCurve(Metric::kMse, y, s, order, ratios);
  EXPECT_EQ(curve[0].n, 40);
  EXPECT_DOUBLE_EQ(*curve[0].metric, 500.0 / 40);
  EXPECT_EQ(curve[1].n, 20);
  EXPECT_DOUBLE_EQ(*curve[1].metric, 500.0 / 20);
  EXPECT_EQ(curve[2].n, 5);
  EXPECT_DOUBLE_EQ(*curve[2].metric, 100.0);
}

TEST(Diagnose, PsiAndKMeans) {
  std::mt19937_64 rng(1);
  const auto a = testing::Normal(rng, 1000);
  EXPECT_NEAR(Psi(a, a, 10), 0.0, 1e-12);
  const auto shifted = testing::Normal(rng, 1000, 1.0);
  EXPECT_GT(Psi(shifted, a, 10), 0.25);
  Eigen::MatrixXd points(300, 2);
  for (int i = 0; i < 300; ++i) {
    const int c = i % 3;
    points(i, 0) = 10 * c + testing::Normal(rng, 1, 0, 0.1)[0];
    points(i, 1) = -5 * c + testing::Normal(rng, 1, 0, 0.1)[0];
  }
  const KMeansResult km = KMeans(points, 3, 5, 7);
  for (int i = 3; i < 300; ++i) EXPECT_EQ(km.assignment[i], km.assignment[i % 3]);
  EXPECT_EQ(KMeans(points, 3, 5, 7).assignment, km.assignment);
}

TEST(Diagnose, ReliabilityRegressionCoverage) {
  std::mt19937_64 rng(12);
  const int n = 3000;
  const auto x = testing::Normal(rng, n);
  const auto e = testing::Normal(rng, n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = x[i] + e[i];
  const Dataset ds = MakeDataset({NumericColumn("x", x)}, y, TaskKind::kRegression, 2000);
  const TrainedModel m = MustTrain(ds, ModelFamily::kGlm);
  ReliabilityOptions options;
  options.seed = 4;
  SliceSpec slice;
  slice.features = {"x"};
  slice.bins = 4;
  options.slice = slice;
  auto r = Reliability(m, ds, options);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->calibration_size, 400);
  EXPECT_EQ(r->rank, 361);
  EXPECT_NEAR(r->coverage, 0.9, 0.04);
  EXPECT_NEAR(r->mean_width, 2 * r->q_hat, 1e-12);
  EXPECT_EQ(r->slices.size(), 4u);
}

TEST(Diagnose, FairnessAdverseImpact) {
  EXPECT_NEAR(*AdverseImpactRatio(0.3, 0.5), 0.6, 1e-15);
  EXPECT_FALSE(AdverseImpactRatio(0.3, 0.0).has_value());
}

TEST(Compare, CompetitionRanksShareTheBetterRank) {
  const std::vector<std::optional<double>> v = {0.5, 0.9, 0.5, std::nullopt};
  const auto hi = CompetitionRanks(v, true);
  EXPECT_EQ(hi[0], 2);
  EXPECT_EQ(hi[1], 1);
  EXPECT_EQ(hi[2], 2);
  EXPECT_FALSE(hi[3].has_value());
  const auto lo = CompetitionRanks(v, false);
  EXPECT_EQ(lo[0], 1);
  EXPECT_EQ(lo[2], 1);
  EXPECT_EQ(lo[1], 3);
}

TEST(Compare, RanksModelsOnOneSplit) {
  const Dataset ds = testing::RegressionFixture(600, 13);
  const TrainedModel glm = MustTrain(ds, ModelFamily::kGlm);
  const TrainedModel gam = MustTrain(ds, ModelFamily::kGam);
  const TrainedModel* models[] = {&glm, &gam};
  CompareOptions options;
  options.tests = {"accuracy"};
  auto report = Compare(models, ds, options);
  ASSERT_TRUE(report.ok()) << report.status();
  EXPECT_EQ(report->overall_rank.size(), 2u);
  // The GAM captures the curvature the GLM misses.
  EXPECT_EQ(report->overall_rank[1], 1);
  const TrainedModel* one[] = {&glm};
  EXPECT_FALSE(Compare(one, ds, options).ok());
}

}  // namespace
}  // namespace workbench
