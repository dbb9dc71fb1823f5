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

#ifndef WORKBENCH_MODEL_H_
#define WORKBENCH_MODEL_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "workbench/boosting.h"
#include "workbench/dataset.h"
#include "workbench/gam.h"
#include "workbench/glm.h"
#include "workbench/tree.h"

namespace workbench {

enum class ModelFamily { kGlm, kGam, kTree, kXgb1, kXgb2, kRegistered };

std::string_view ModelFamilyName(ModelFamily family);
// Accepts the trainable family names; the error lists them.
absl::StatusOr<ModelFamily> ParseModelFamily(std::string_view name);
inline constexpr char kSupportedFamilies[] = "glm, gam, tree, xgb1, xgb2";

struct ModelSpec {
  ModelFamily family = ModelFamily::kGlm;
  GlmParams glm;
  GamParams gam;
  TreeParams tree;
  BoostParams boost;
  uint64_t seed = 0;
};

// Default spec of a family (boosting defaults differ between XGB1 and XGB2).
ModelSpec DefaultSpec(ModelFamily family);

struct Xgb1Model {
  BoostedModel boosted;
};

struct Xgb2Model {
  BoostedModel boosted;
};

using PredictionFunction = std::function<std::vector<double>(const FeatureMatrix&)>;

struct RegisteredModel {
  enum class Kind { kCallable, kScoreTable };
  Kind kind = Kind::kScoreTable;
  PredictionFunction function;  // kCallable
  // kScoreTable: score per dataset row id.
  std::map<int64_t, double> scores;
  std::string source;
};

using ModelBody =
    std::variant<GlmModel, GamModel, TreeModel, Xgb1Model, Xgb2Model,
                 RegisteredModel>;

struct TrainedModel {
  std::string id;
  ModelFamily family = ModelFamily::kGlm;
  TaskKind task = TaskKind::kRegression;
  Schema schema;
  ModelSpec spec;
  ModelBody body;

  // Glass models trained here; registered models are not interpretable.
  bool interpretable() const { return family != ModelFamily::kRegistered; }
  // False for score tables, which cannot score synthetic rows.
  bool reevaluable() const;
  bool persistable() const;
};

// Trains on the train split of a prepared dataset.
absl::StatusOr<TrainedModel> Train(const Dataset& ds, const ModelSpec& spec,
                                   std::string id);

// Scores file: CSV with header `row_id,score`, one row per dataset row.
absl::StatusOr<TrainedModel> RegisterScores(const Dataset& ds,
                                            std::string_view scores_csv,
                                            std::string id,
                                            std::string source = "");
absl::StatusOr<TrainedModel> RegisterScoresFile(const Dataset& ds,
                                                const std::string& path,
                                                std::string id);
absl::StatusOr<TrainedModel> RegisterCallable(const Dataset& ds,
                                              PredictionFunction function,
                                              std::string id);

// Regression: the real prediction. Binary: probability of class 1.
absl::StatusOr<std::vector<double>> Predict(const TrainedModel& model,
                                            const Rows& rows);
// Pre-link margin (equal to Predict for regression, for trees and for
// registered models).
absl::StatusOr<std::vector<double>> PredictMargin(const TrainedModel& model,
                                                  const Rows& rows);

// Convenience: predictions for dataset rows.
absl::StatusOr<std::vector<double>> PredictRows(const TrainedModel& model,
                                                const Dataset& ds,
                                                std::span<const int> rows);

double Sigmoid(double margin);

}  // namespace workbench

#endif  // WORKBENCH_MODEL_H_
