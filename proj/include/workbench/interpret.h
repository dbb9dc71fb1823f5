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

#ifndef WORKBENCH_INTERPRET_H_
#define WORKBENCH_INTERPRET_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "workbench/dataset.h"
#include "workbench/json_util.h"
#include "workbench/model.h"

namespace workbench {

inline constexpr int kEffectGridPoints = 20;

// Main effect of one feature. Numeric features are evaluated on an evenly
// spaced grid over the train range; categorical features once per level.
struct EffectCurve {
  std::string feature;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<double> grid;
  std::vector<std::string> levels;
  std::vector<double> values;
  // Train rows per grid cell (numeric: rows in (grid[g-1], grid[g]]).
  std::vector<int> counts;
};

struct PairSurface {
  std::string first;
  std::string second;
  // Bin edges of both features; values[a * cols + b] is the effect on the
  // cell (bin a of first, bin b of second).
  std::vector<double> first_edges;
  std::vector<double> second_edges;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  double importance = 0.0;
};

struct GlobalInterpretation {
  std::string model_id;
  ModelFamily family = ModelFamily::kGlm;
  std::vector<std::string> features;
  // Normalized jointly with the pair importances so that everything sums to 1
  // unless all are zero.
  std::vector<double> importance;
  std::vector<double> raw_importance;
  std::vector<EffectCurve> curves;
  std::vector<PairSurface> pairs;
  Json form;
};

struct PathCondition {
  std::string feature;
  int feature_index = 0;
  // "<=", ">", "in" or "not in".
  std::string op;
  double threshold = 0.0;
  std::vector<std::string> levels;
  double value = 0.0;  // the instance value
};

struct PairContribution {
  std::string first;
  std::string second;
  double value = 0.0;
};

struct LocalInterpretation {
  std::string model_id;
  ModelFamily family = ModelFamily::kGlm;
  // base + sum(contributions) + sum(pair_contributions) == score, where score
  // is the margin for binary GLM/GAM/XGB models and the leaf value for trees.
  double base = 0.0;
  std::vector<std::string> features;
  std::vector<double> contributions;
  std::vector<PairContribution> pair_contributions;
  double score = 0.0;
  std::vector<PathCondition> path;  // trees only
};

// Main effect f_j(value) of a GLM, GAM or XGB model, centered on train means.
absl::StatusOr<double> MainEffect(const TrainedModel& model, int feature,
                                  double value);

// Capability error unless the model is a glass model trained here.
absl::Status CheckInterpretable(const TrainedModel& model);

absl::StatusOr<GlobalInterpretation> InterpretGlobal(const TrainedModel& model,
                                                     const Dataset& ds);

absl::StatusOr<LocalInterpretation> InterpretLocal(
    const TrainedModel& model, std::span<const double> instance);

// The instance is the dataset row `row`.
absl::StatusOr<LocalInterpretation> InterpretLocalRow(const TrainedModel& model,
                                                      const Dataset& ds,
                                                      int row);

}  // namespace workbench

#endif  // WORKBENCH_INTERPRET_H_
