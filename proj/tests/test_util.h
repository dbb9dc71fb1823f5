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

#ifndef WORKBENCH_TESTS_TEST_UTIL_H_
#define WORKBENCH_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "workbench/dataset.h"
#include "workbench/experiment.h"
#include "workbench/model.h"

namespace workbench::testing {

inline Column NumericColumn(std::string name, std::vector<double> values) {
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::kNumeric;
  c.missing.assign(values.size(), 0);
  c.values = std::move(values);
  return c;
}

inline Column CategoricalColumn(std::string name, std::vector<int> codes,
                                std::vector<std::string> levels) {
  Column c;
  c.name = std::move(name);
  c.kind = ColumnKind::kCategorical;
  c.levels = std::move(levels);
  for (const int k : codes) c.values.push_back(k);
  c.missing.assign(c.values.size(), 0);
  return c;
}

// Prepared dataset: the feature columns, then target "y". Rows [0, n_train)
// are train, the rest test.
inline Dataset MakeDataset(std::vector<Column> features, std::vector<double> y,
                           TaskKind task, int n_train) {
  Dataset ds;
  ds.name = "fixture";
  ds.columns = std::move(features);
  ds.columns.push_back(NumericColumn("y", std::move(y)));
  ds.target = "y";
  ds.task = task;
  const int n = ds.num_rows();
  for (int r = 0; r < n; ++r) {
    ds.split.push_back(r < n_train ? SplitRole::kTrain : SplitRole::kTest);
  }
  ds.prepared = true;
  return ds;
}

inline std::vector<double> Normal(std::mt19937_64& rng, int n, double mean = 0,
                                  double sd = 1) {
  std::normal_distribution<double> dist(mean, sd);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

inline std::vector<double> Uniform(std::mt19937_64& rng, int n, double lo = -1,
                                   double hi = 1) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

// Regression fixture y = 2 x1 - x2^2 + 0.5 sin(3 x3) + noise, plus a
// three-level categorical "g".
inline Dataset RegressionFixture(int n, uint64_t seed, int n_train = -1) {
  std::mt19937_64 rng(seed);
  const auto x1 = Uniform(rng, n);
  const auto x2 = Uniform(rng, n);
  const auto x3 = Normal(rng, n);
  const auto e = Normal(rng, n, 0, 0.3);
  std::vector<int> g(n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    g[i] = static_cast<int>(rng() % 3);
    y[i] = 2 * x1[i] - x2[i] * x2[i] + 0.5 * std::sin(3 * x3[i]) + 0.4 * (g[i] == 1) + e[i];
  }
  return MakeDataset({NumericColumn("x1", x1), NumericColumn("x2", x2),
                      NumericColumn("x3", x3), CategoricalColumn("g", g, {"a", "b", "c"})},
                     y, TaskKind::kRegression, n_train < 0 ? n * 4 / 5 : n_train);
}

inline Dataset BinaryFixture(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto x1 = Uniform(rng, n);
  const auto x2 = Uniform(rng, n);
  const auto x3 = Normal(rng, n);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    const double m = 2.5 * x1[i] - 2 * x2[i] * x2[i] + 0.5 + x3[i] * x1[i];
    y[i] = u(rng) < Sigmoid(m) ? 1.0 : 0.0;
  }
  return MakeDataset({NumericColumn("x1", x1), NumericColumn("x2", x2),
                      NumericColumn("x3", x3)},
                     y, TaskKind::kBinary, n * 4 / 5);
}

// Fresh directory under the system temp dir.
inline std::string TempDir(const std::string& tag) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("workbench_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline std::string ToCsv(const Dataset& ds) { return DatasetToCsv(ds); }

}  // namespace workbench::testing

#endif  // WORKBENCH_TESTS_TEST_UTIL_H_
