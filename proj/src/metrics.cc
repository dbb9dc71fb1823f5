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

#include "workbench/metrics.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "workbench/stats.h"

namespace workbench {

std::string_view MetricName(Metric metric) {
  switch (metric) {
    case Metric::kMse: return "MSE";
    case Metric::kMae: return "MAE";
    case Metric::kR2: return "R2";
    case Metric::kAcc: return "ACC";
    case Metric::kAuc: return "AUC";
    case Metric::kRecall: return "Recall";
    case Metric::kPrecision: return "Precision";
    case Metric::kF1: return "F1";
    case Metric::kLogLoss: return "LogLoss";
  }
  return "?";
}

absl::StatusOr<Metric> ParseMetric(std::string_view name) {
  for (const Metric m :
       {Metric::kMse, Metric::kMae, Metric::kR2, Metric::kAcc, Metric::kAuc,
        Metric::kRecall, Metric::kPrecision, Metric::kF1, Metric::kLogLoss}) {
    std::string lower(MetricName(m));
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    std::string query(name);
    std::transform(query.begin(), query.end(), query.begin(), ::tolower);
    if (lower == query) return m;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown metric '", std::string(name), "'"));
}

bool HigherIsBetter(Metric metric) {
  switch (metric) {
    case Metric::kMse:
    case Metric::kMae:
    case Metric::kLogLoss:
      return false;
    default:
      return true;
  }
}

bool MetricAppliesTo(Metric metric, TaskKind task) {
  switch (metric) {
    case Metric::kMse:
    case Metric::kMae:
    case Metric::kR2:
      return task == TaskKind::kRegression;
    default:
      return task == TaskKind::kBinary;
  }
}

std::vector<Metric> MetricsFor(TaskKind task) {
  if (task == TaskKind::kRegression) {
    return {Metric::kMse, Metric::kMae, Metric::kR2};
  }
  return {Metric::kAcc,       Metric::kAuc, Metric::kRecall,
          Metric::kPrecision, Metric::kF1,  Metric::kLogLoss};
}

Metric DefaultMetric(TaskKind task) {
  return task == TaskKind::kRegression ? Metric::kMse : Metric::kAuc;
}

Metric DefaultLoss(TaskKind task) {
  return task == TaskKind::kRegression ? Metric::kMse : Metric::kLogLoss;
}

double RowLoss(TaskKind task, double y, double score) {
  if (task == TaskKind::kRegression) return (y - score) * (y - score);
  const double p = std::clamp(score, kProbabilityClip, 1.0 - kProbabilityClip);
  return y == 1.0 ? -std::log(p) : -std::log(1.0 - p);
}

std::optional<double> RankAuc(std::span<const double> y,
                              std::span<const double> score) {
  const auto ranks = AverageRanks(score);
  double positives = 0, rank_sum = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) {
      positives += 1;
      rank_sum += ranks[i];
    }
  }
  const double negatives = static_cast<double>(y.size()) - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  return (rank_sum - positives * (positives + 1) / 2) / (positives * negatives);
}

std::optional<double> ComputeMetric(Metric metric, std::span<const double> y,
                                    std::span<const double> score,
                                    double threshold) {
  const size_t n = y.size();
  if (n == 0) return std::nullopt;
  switch (metric) {
    case Metric::kMse:
    case Metric::kMae: {
      double sum = 0;
      for (size_t i = 0; i < n; ++i) {
        const double r = y[i] - score[i];
        sum += metric == Metric::kMse ? r * r : std::abs(r);
      }
      return sum / static_cast<double>(n);
    }
    case Metric::kR2: {
      const double mean = Mean(y);
      double sse = 0, sst = 0;
      for (size_t i = 0; i < n; ++i) {
        sse += (y[i] - score[i]) * (y[i] - score[i]);
        sst += (y[i] - mean) * (y[i] - mean);
      }
      if (sst <= 0) return std::nullopt;
      return 1.0 - sse / sst;
    }
    case Metric::kLogLoss: {
      double sum = 0;
      for (size_t i = 0; i < n; ++i) {
        sum += RowLoss(TaskKind::kBinary, y[i], score[i]);
      }
      return sum / static_cast<double>(n);
    }
    case Metric::kAuc:
      return RankAuc(y, score);
    case Metric::kAcc:
    case Metric::kRecall:
    case Metric::kPrecision:
    case Metric::kF1: {
      double tp = 0, fp = 0, tn = 0, fn = 0;
      for (size_t i = 0; i < n; ++i) {
        const bool predicted = score[i] >= threshold;
        const bool actual = y[i] == 1.0;
        if (predicted && actual) tp += 1;
        if (predicted && !actual) fp += 1;
        if (!predicted && actual) fn += 1;
        if (!predicted && !actual) tn += 1;
      }
      if (metric == Metric::kAcc) return (tp + tn) / static_cast<double>(n);
      const std::optional<double> recall =
          tp + fn > 0 ? std::optional<double>(tp / (tp + fn)) : std::nullopt;
      const std::optional<double> precision =
          tp + fp > 0 ? std::optional<double>(tp / (tp + fp)) : std::nullopt;
      if (metric == Metric::kRecall) return recall;
      if (metric == Metric::kPrecision) return precision;
      if (!recall || !precision) return std::nullopt;
      if (*recall + *precision == 0) return 0.0;
      return 2 * *precision * *recall / (*precision + *recall);
    }
  }
  return std::nullopt;
}

std::optional<double> MetricSet::Get(Metric metric) const {
  for (const auto& v : values) {
    if (v.metric == metric) return v.value;
  }
  return std::nullopt;
}

MetricSet ComputeMetricSet(TaskKind task, std::span<const double> y,
                           std::span<const double> score, double threshold) {
  MetricSet out;
  out.task = task;
  out.n = static_cast<int>(y.size());
  out.threshold = threshold;
  for (const Metric m : MetricsFor(task)) {
    out.values.push_back({m, ComputeMetric(m, y, score, threshold)});
  }
  return out;
}

}  // namespace workbench
