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

#ifndef WORKBENCH_COMPARE_H_
#define WORKBENCH_COMPARE_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "workbench/dataset.h"
#include "workbench/diagnose.h"
#include "workbench/model.h"

namespace workbench {

struct CompareOptions {
  // Any of accuracy, robustness, resilience, reliability. Accuracy is always
  // run since it provides the overall tie-break.
  std::vector<std::string> tests = {"accuracy", "robustness", "resilience",
                                    "reliability"};
  uint64_t seed = 0;
  double threshold = 0.5;
  RobustnessOptions robustness;
  ResilienceOptions resilience;
  ReliabilityOptions reliability;
};

struct RankCriterion {
  std::string name;
  bool higher_is_better = false;
  std::vector<std::optional<double>> values;  // per model
  std::vector<std::optional<int>> ranks;      // absent where the value is
};

struct ComparisonReport {
  std::vector<std::string> model_ids;
  std::vector<std::string> tests;
  std::vector<AccuracyResult> accuracy;
  std::vector<std::optional<RobustnessResult>> robustness;
  std::vector<std::optional<ResilienceResult>> resilience;
  std::vector<std::optional<ReliabilityResult>> reliability;
  std::vector<RankCriterion> criteria;
  std::vector<std::optional<double>> mean_rank;
  std::vector<int> overall_rank;
  std::vector<std::string> notes;
};

// Standard competition ranking: 1 + the number of strictly better values.
// Absent values receive no rank.
std::vector<std::optional<int>> CompetitionRanks(
    std::span<const std::optional<double>> values, bool higher_is_better);

absl::StatusOr<ComparisonReport> Compare(
    std::span<const TrainedModel* const> models, const Dataset& ds,
    const CompareOptions& options);

}  // namespace workbench

#endif  // WORKBENCH_COMPARE_H_
