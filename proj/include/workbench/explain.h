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

#ifndef WORKBENCH_EXPLAIN_H_
#define WORKBENCH_EXPLAIN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "workbench/dataset.h"
#include "workbench/metrics.h"
#include "workbench/model.h"

namespace workbench {

// Permutation feature importance on the test split.
struct PfiOptions {
  std::optional<Metric> metric;  // default: the task's default metric
  int repeats = 5;
  uint64_t seed = 0;
};

struct PfiFeature {
  std::string feature;
  double mean = 0.0;
  double sd = 0.0;  // sample sd over repeats
  std::vector<double> degradations;
};

struct PfiResult {
  Metric metric = Metric::kMse;
  double baseline = 0.0;
  int repeats = 0;
  uint64_t seed = 0;
  std::vector<PfiFeature> features;
};

absl::StatusOr<PfiResult> Pfi(const TrainedModel& model, const Dataset& ds,
                              const PfiOptions& options);

// Partial dependence over the test split.
struct PdpOptions {
  int grid = 20;
};

struct PdpCurve {
  std::string feature;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<double> grid;
  std::vector<std::string> levels;  // categorical
  std::vector<double> values;
  // Test rows per grid cell (numeric: rows in (grid[g-1], grid[g]]).
  std::vector<int> counts;
};

struct PdpSurface {
  std::string first;
  std::string second;
  std::vector<double> first_grid;
  std::vector<double> second_grid;
  std::vector<double> values;  // values[a * second_grid.size() + b]
};

// Quantile grid of `values`: G points at probabilities k / (G - 1),
// de-duplicated.
std::vector<double> QuantileGrid(std::span<const double> values, int points);

absl::StatusOr<PdpCurve> Pdp(const TrainedModel& model, const Dataset& ds,
                             const std::string& feature,
                             const PdpOptions& options);
absl::StatusOr<PdpSurface> Pdp2(const TrainedModel& model, const Dataset& ds,
                                const std::string& first,
                                const std::string& second,
                                const PdpOptions& options);

// Accumulated local effects over the train split.
struct AleOptions {
  int bins = 20;
};

struct AleCurve {
  std::string feature;
  std::vector<double> edges;    // K + 1 after de-duplication
  std::vector<double> values;   // centered accumulated effect at each edge
  std::vector<int> counts;      // rows per bin (K)
  std::vector<double> local_effects;  // mean finite difference per bin
  // Centered value per bin (average of its two edges); the count-weighted
  // mean of these is zero.
  std::vector<double> bin_values;
};

absl::StatusOr<AleCurve> Ale(const TrainedModel& model, const Dataset& ds,
                             const std::string& feature,
                             const AleOptions& options);

struct LimeOptions {
  int samples = 1000;
  int max_features = 10;
  double ridge = 1e-3;
  uint64_t seed = 0;
};

struct LimeExplanation {
  std::vector<std::string> features;  // selected, in selection order
  // Numeric: per unit change; categorical: effect of differing from the
  // instance level.
  std::vector<double> coefficients;
  double intercept = 0.0;
  double r2 = 0.0;  // weighted, on the perturbation sample
  double kernel_width = 0.0;
  int samples = 0;
  uint64_t seed = 0;
};

absl::StatusOr<LimeExplanation> Lime(const TrainedModel& model,
                                     const Dataset& ds,
                                     std::span<const double> instance,
                                     const LimeOptions& options);

inline constexpr int kExactShapMaxFeatures = 12;

struct ShapOptions {
  int background_size = 100;
  int coalitions = 2048;  // sampled mode
  uint64_t seed = 0;
  // Overrides the sampled background when set.
  std::optional<FeatureMatrix> background;
};

struct ShapExplanation {
  bool exact = true;
  double base = 0.0;  // phi_0, mean prediction over the background
  std::vector<std::string> features;
  std::vector<double> values;
  double prediction = 0.0;
  // Dataset row ids of the background sample (empty for explicit ones).
  std::vector<int64_t> background_rows;
  int coalitions = 0;
  uint64_t seed = 0;
};

absl::StatusOr<ShapExplanation> Shap(const TrainedModel& model,
                                     const Dataset& ds,
                                     std::span<const double> instance,
                                     const ShapOptions& options);

// Exact interventional Shapley values of f at `instance` against
// `background`, by enumeration of all 2^d coalitions.
absl::StatusOr<std::vector<double>> ExactShapley(
    const std::function<absl::StatusOr<std::vector<double>>(const Rows&)>& f,
    std::span<const double> instance, const FeatureMatrix& background,
    double* base);

}  // namespace workbench

#endif  // WORKBENCH_EXPLAIN_H_
