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
#include <random>

#include "gtest/gtest.h"
#include "test_util.h"
#include "workbench/csv.h"
#include "workbench/dataset.h"
#include "workbench/metrics.h"
#include "workbench/stats.h"

namespace workbench {
namespace {

using testing::MakeDataset;
using testing::NumericColumn;

TEST(Csv, ParsesQuotedFieldsAndCrlf) {
  auto records = ParseCsv("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\r\n3,\n");
  ASSERT_TRUE(records.ok()) << records.status();
  ASSERT_EQ(records->size(), 3u);
  EXPECT_EQ((*records)[1][0], "x,1");
  EXPECT_EQ((*records)[1][1], "say \"hi\"");
  EXPECT_EQ((*records)[2][1], "");
}

TEST(Csv, RejectsUnterminatedQuote) {
  EXPECT_FALSE(ParseCsv("a\n\"open\n").ok());
}

TEST(Csv, RoundTripsThroughFormat) {
  const std::vector<CsvRecord> records = {{"a", "b"}, {"1,2", "q\"x"}, {"", "3"}};
  auto parsed = ParseCsv(FormatCsv(records));
  ASSERT_TRUE(parsed.ok());
  EXPECT_EQ(*parsed, records);
}

TEST(Dataset, LoadsTypesAndMissingCells) {
  auto ds = LoadCsvText("x,c,y\n1.5,a,0\n,b,1\n2,,1\n", "y", TaskKind::kBinary);
  ASSERT_TRUE(ds.ok()) << ds.status();
  EXPECT_EQ(ds->num_rows(), 3);
  EXPECT_EQ(ds->columns[0].kind, ColumnKind::kNumeric);
  EXPECT_EQ(ds->columns[1].kind, ColumnKind::kCategorical);
  EXPECT_TRUE(ds->columns[0].IsMissing(1));
  EXPECT_TRUE(ds->columns[1].IsMissing(2));
  EXPECT_EQ(ds->columns[1].levels, (std::vector<std::string>{"a", "b"}));
}

TEST(Dataset, RejectsBadTargets) {
  EXPECT_FALSE(LoadCsvText("x,y\n1,2\n", "y", TaskKind::kBinary).ok());
  EXPECT_FALSE(LoadCsvText("x,y\n1,2\n", "z", TaskKind::kRegression).ok());
  EXPECT_FALSE(LoadCsvText("x,y\n1,\n", "y", TaskKind::kRegression).ok());
  EXPECT_FALSE(LoadCsvText("x,y\n", "y", TaskKind::kRegression).ok());
}

TEST(Dataset, PrepareIsSeededStratifiedAndImputes) {
  std::string text = "x,c,y\n";
  for (int i = 0; i < 100; ++i) {
    text += (i % 7 == 0 ? std::string() : std::to_string(i)) + "," +
            (i % 11 == 0 ? std::string() : std::string(i % 2 ? "u" : "v")) + "," +
            std::to_string(i % 4 == 0 ? 1 : 0) + "\n";
  }
  auto raw = LoadCsvText(text, "y", TaskKind::kBinary);
  ASSERT_TRUE(raw.ok());
  auto a = Prepare(*raw, 0.2, 5);
  auto b = Prepare(*raw, 0.2, 5);
  auto c = Prepare(*raw, 0.2, 6);
  ASSERT_TRUE(a.ok() && b.ok() && c.ok());
  EXPECT_EQ(a->split, b->split);
  EXPECT_NE(a->split, c->split);
  const auto test = a->RowsIn(SplitRole::kTest);
  EXPECT_EQ(test.size(), 20u);
  int positives = 0;
  for (const int r : test) positives += a->columns[2].values[r] == 1.0;
  EXPECT_EQ(positives, 5);

  // Numeric cells get the train median, categorical cells the "missing" level.
  std::vector<double> train_x;
  for (const int r : a->RowsIn(SplitRole::kTrain)) {
    if (!raw->columns[0].IsMissing(r)) train_x.push_back(raw->columns[0].values[r]);
  }
  const double median = Quantile(train_x, 0.5);
  const Column& x = a->columns[0];
  const Column& cat = a->columns[1];
  for (int r = 0; r < a->num_rows(); ++r) {
    EXPECT_FALSE(x.IsMissing(r));
    if (raw->columns[0].IsMissing(r)) EXPECT_EQ(x.values[r], median);
    if (raw->columns[1].IsMissing(r)) {
      EXPECT_EQ(cat.levels[static_cast<int>(cat.values[r])], kMissingLevel);
    }
  }
}

TEST(Dataset, PrepareRejectsDegenerateRatios) {
  auto raw = LoadCsvText("x,y\n1,1\n2,2\n3,3\n4,4\n5,5\n6,6\n", "y", TaskKind::kRegression);
  ASSERT_TRUE(raw.ok());
  EXPECT_FALSE(Prepare(*raw, 0.0, 1).ok());
  EXPECT_FALSE(Prepare(*raw, 1.0, 1).ok());
  EXPECT_FALSE(Prepare(*raw, 0.01, 1).ok());
}

TEST(Eda, SummaryMatchesDirectComputation) {
  std::mt19937_64 rng(3);
  const auto x = testing::Normal(rng, 200);
  std::vector<double> y(200);
  for (int i = 0; i < 200; ++i) y[i] = 3 * x[i] + 1;
  const Dataset ds = MakeDataset({NumericColumn("x", x), NumericColumn("k", std::vector<double>(200, 4.0))},
                                 y, TaskKind::kRegression, 150);
  const EdaSummary s = Summarize(ds);
  EXPECT_EQ(s.num_rows, 200);
  ASSERT_EQ(s.numeric.size(), 3u);
  EXPECT_NEAR(s.numeric[0].mean, Mean(x), 1e-12);
  EXPECT_NEAR(s.numeric[0].sd, SampleSd(x), 1e-12);
  int total = 0;
  for (const int c : s.numeric[0].histogram_counts) total += c;
  EXPECT_EQ(total, 200);
  EXPECT_EQ(s.numeric[0].histogram_edges.size(), 21u);
  // x and y are perfectly correlated; the constant column has no correlation.
  const auto& names = s.pearson.columns;
  const int ix = std::find(names.begin(), names.end(), "x") - names.begin();
  const int iy = std::find(names.begin(), names.end(), "y") - names.begin();
  const int ik = std::find(names.begin(), names.end(), "k") - names.begin();
  EXPECT_NEAR(*s.pearson.values[ix][iy], 1.0, 1e-12);
  EXPECT_NEAR(*s.spearman.values[ix][iy], 1.0, 1e-12);
  EXPECT_FALSE(s.pearson.values[ix][ik].has_value());
  EXPECT_NE(std::find(s.degenerate_columns.begin(), s.degenerate_columns.end(), "k"),
            s.degenerate_columns.end());
}

TEST(Eda, QualityCountsDuplicatesConstantsOutliers) {
  auto ds = LoadCsvText("x,c,y\n1,a,1\n1,a,1\n2,a,2\n3,a,3\n4,a,4\n100,a,5\n,a,6\n",
                        "y", TaskKind::kRegression);
  ASSERT_TRUE(ds.ok());
  const DataQualityReport q = DataQuality(*ds);
  EXPECT_EQ(q.duplicate_rows, 1);
  EXPECT_EQ(q.columns[0].missing, 1);
  EXPECT_EQ(q.columns[0].outliers, 1);
  EXPECT_TRUE(q.columns[1].constant);
  EXPECT_FALSE(q.columns[1].outliers.has_value());
}

TEST(Eda, FeatureSelectRanksByAssociation) {
  std::mt19937_64 rng(9);
  const auto a = testing::Normal(rng, 300);
  const auto b = testing::Normal(rng, 300);
  const auto e = testing::Normal(rng, 300);
  std::vector<double> y(300);
  for (int i = 0; i < 300; ++i) y[i] = 3 * b[i] + 0.5 * a[i] + 0.1 * e[i];
  const Dataset ds = MakeDataset({NumericColumn("a", a), NumericColumn("b", b), NumericColumn("e", e)},
                                 y, TaskKind::kRegression, 240);
  auto sel = FeatureSelect(ds, 2);
  ASSERT_TRUE(sel.ok());
  ASSERT_EQ(sel->ranked.size(), 2u);
  EXPECT_EQ(sel->ranked[0].feature, "b");
  EXPECT_EQ(sel->ranked[1].feature, "a");
  EXPECT_FALSE(sel->truncated);
  auto all = FeatureSelect(ds, 10);
  ASSERT_TRUE(all.ok());
  EXPECT_TRUE(all->truncated);
  EXPECT_EQ(all->ranked.size(), 3u);
}

TEST(Stats, QuantileMatchesTypeSevenDefinition) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 40);
    auto v = testing::Normal(rng, n);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (const double p : {0.0, 0.1, 0.25, 0.5, 0.77, 1.0}) {
      const double h = (n - 1) * p;
      const int lo = static_cast<int>(std::floor(h));
      const int hi = std::min(lo + 1, n - 1);
      const double expected = sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
      EXPECT_NEAR(Quantile(v, p), expected, 1e-12);
    }
  }
}

TEST(Stats, AverageRanksSplitTies) {
  const std::vector<double> v = {3, 1, 3, 2};
  EXPECT_EQ(AverageRanks(v), (std::vector<double>{3.5, 1, 3.5, 2}));
}

TEST(Stats, BinIndexPutsCutValuesLeft) {
  const std::vector<double> cuts = {1, 2};
  EXPECT_EQ(BinIndex(cuts, 0.5), 0);
  EXPECT_EQ(BinIndex(cuts, 1.0), 0);
  EXPECT_EQ(BinIndex(cuts, 1.5), 1);
  EXPECT_EQ(BinIndex(cuts, 2.5), 2);
}

double PairwiseAuc(const std::vector<double>& y, const std::vector<double>& s) {
  double wins = 0, pairs = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1.0) continue;
    for (size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0.0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

TEST(Metrics, RankAucEqualsPairwiseAucWithTies) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> y(200), s(200);
    for (int i = 0; i < 200; ++i) {
      y[i] = rng() % 3 == 0 ? 1.0 : 0.0;
      s[i] = static_cast<double>(rng() % 25) / 25.0;
    }
    const auto auc = RankAuc(y, s);
    ASSERT_TRUE(auc.has_value());
    EXPECT_NEAR(*auc, PairwiseAuc(y, s), 1e-12);
  }
}

TEST(Metrics, UndefinedValuesAreAbsent) {
  const std::vector<double> y = {1, 1, 1};
  const std::vector<double> s = {0.2, 0.4, 0.9};
  EXPECT_FALSE(ComputeMetric(Metric::kAuc, y, s).has_value());
  const std::vector<double> c = {2, 2, 2};
  EXPECT_FALSE(ComputeMetric(Metric::kR2, c, s).has_value());
  const std::vector<double> y2 = {0, 1, 0};
  const std::vector<double> low = {0.1, 0.2, 0.3};
  EXPECT_FALSE(ComputeMetric(Metric::kPrecision, y2, low).has_value());
}

TEST(Metrics, ClassificationCounts) {
  const std::vector<double> y = {1, 1, 0, 0, 1};
  const std::vector<double> s = {0.9, 0.4, 0.6, 0.1, 0.5};
  // Predictions at 0.5: 1 0 1 0 1 -> tp 2, fn 1, fp 1, tn 1.
  EXPECT_DOUBLE_EQ(*ComputeMetric(Metric::kAcc, y, s), 3.0 / 5);
  EXPECT_DOUBLE_EQ(*ComputeMetric(Metric::kRecall, y, s), 2.0 / 3);
  EXPECT_DOUBLE_EQ(*ComputeMetric(Metric::kPrecision, y, s), 2.0 / 3);
  EXPECT_DOUBLE_EQ(*ComputeMetric(Metric::kF1, y, s), 2.0 / 3);
  double ll = 0;
  for (int i = 0; i < 5; ++i) ll -= y[i] ? std::log(s[i]) : std::log(1 - s[i]);
  EXPECT_NEAR(*ComputeMetric(Metric::kLogLoss, y, s), ll / 5, 1e-15);
}

TEST(Metrics, RegressionMetrics) {
  const std::vector<double> y = {1, 2, 3, 4};
  const std::vector<double> s = {1.5, 2, 2, 5};
  EXPECT_DOUBLE_EQ(*ComputeMetric(Metric::kMse, y, s), (0.25 + 0 + 1 + 1) / 4);
  EXPECT_DOUBLE_EQ(*ComputeMetric(Metric::kMae, y, s), (0.5 + 0 + 1 + 1) / 4);
  EXPECT_DOUBLE_EQ(*ComputeMetric(Metric::kR2, y, s), 1 - 2.25 / 5);
  EXPECT_TRUE(ParseMetric("auc").ok());
  EXPECT_FALSE(ParseMetric("gini").ok());
}

}  // namespace
}  // namespace workbench
