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

#ifndef WORKBENCH_METRICS_H_
#define WORKBENCH_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "workbench/dataset.h"

namespace workbench {

enum class Metric {
  kMse,
  kMae,
  kR2,
  kAcc,
  kAuc,
  kRecall,
  kPrecision,
  kF1,
  kLogLoss,
};

std::string_view MetricName(Metric metric);
absl::StatusOr<Metric> ParseMetric(std::string_view name);
// True for score-type metrics (R2, ACC, AUC, ...), false for losses.
bool HigherIsBetter(Metric metric);
bool MetricAppliesTo(Metric metric, TaskKind task);

// Metrics reported by the accuracy test, in report order.
std::vector<Metric> MetricsFor(TaskKind task);
// Default metric of a task for single-number summaries.
Metric DefaultMetric(TaskKind task);
// Default loss-type metric (per-row decomposable).
Metric DefaultLoss(TaskKind task);

inline constexpr double kProbabilityClip = 1e-15;

// Evaluates one metric. Absent when undefined, e.g. AUC on a single-class
// sample, R2 with a constant target, precision without positive predictions.
std::optional<double> ComputeMetric(Metric metric, std::span<const double> y,
                                    std::span<const double> score,
                                    double threshold = 0.5);

// AUC by the rank-sum statistic with average ranks on ties.
std::optional<double> RankAuc(std::span<const double> y,
                              std::span<const double> score);

// Per-row loss: squared error (regression) or log loss (binary).
double RowLoss(TaskKind task, double y, double score);

struct MetricValue {
  Metric metric;
  std::optional<double> value;
};

struct MetricSet {
  TaskKind task = TaskKind::kRegression;
  int n = 0;
  double threshold = 0.5;
  std::vector<MetricValue> values;

  std::optional<double> Get(Metric metric) const;
};

MetricSet ComputeMetricSet(TaskKind task, std::span<const double> y,
                           std::span<const double> score,
                           double threshold = 0.5);

}  // namespace workbench

#endif  // WORKBENCH_METRICS_H_
