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

#include "workbench/compare.h"

#include <algorithm>

#include "absl/strings/str_cat.h"
#include "workbench/status.h"

namespace workbench {

std::vector<std::optional<int>> CompetitionRanks(
    std::span<const std::optional<double>> values, bool higher_is_better) {
  std::vector<std::optional<int>> ranks(values.size());
  for (size_t a = 0; a < values.size(); ++a) {
    if (!values[a]) continue;
    int better = 0;
    for (size_t b = 0; b < values.size(); ++b) {
      if (!values[b]) continue;
      if (higher_is_better ? *values[b] > *values[a] : *values[b] < *values[a]) ++better;
    }
    ranks[a] = 1 + better;
  }
  return ranks;
}

absl::StatusOr<ComparisonReport> Compare(
    std::span<const TrainedModel* const> models, const Dataset& ds,
    const CompareOptions& options) {
  if (models.size() < 2 || models.size() > 3) {
    return absl::InvalidArgumentError(absl::StrCat(
        "model_compare() takes two or three models, got ", models.size()));
  }
  for (const TrainedModel* m : models) {
    if (m->task != models[0]->task) {
      return absl::InvalidArgumentError("models under comparison must share the task");
    }
    if (m->task != ds.task) {
      return absl::InvalidArgumentError(absl::StrCat(
          "model '", m->id, "' was built for a different task than the dataset"));
    }
  }
  bool run_robustness = false, run_resilience = false, run_reliability = false;
  for (const auto& t : options.tests) {
    if (t == "accuracy") continue;
    if (t == "robustness") {
      run_robustness = true;
    } else if (t == "resilience") {
      run_resilience = true;
    } else if (t == "reliability") {
      run_reliability = true;
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown comparison test '", t,
          "' (expected accuracy|robustness|resilience|reliability)"));
    }
  }

  const int k = static_cast<int>(models.size());
  const TaskKind task = models[0]->task;
  ComparisonReport out;
  out.tests.push_back("accuracy");
  if (run_robustness) out.tests.push_back("robustness");
  if (run_resilience) out.tests.push_back("resilience");
  if (run_reliability) out.tests.push_back("reliability");
  for (const TrainedModel* m : models) out.model_ids.push_back(m->id);

  RobustnessOptions robustness = options.robustness;
  robustness.seed = options.seed;
  ResilienceOptions resilience = options.resilience;
  resilience.seed = options.seed;
  ReliabilityOptions reliability = options.reliability;
  reliability.seed = options.seed;

  out.robustness.resize(k);
  out.resilience.resize(k);
  out.reliability.resize(k);
  for (int i = 0; i < k; ++i) {
    const TrainedModel& m = *models[i];
    ASSIGN_OR_RETURN(AccuracyResult acc, Accuracy(m, ds, options.threshold));
    out.accuracy.push_back(std::move(acc));
    auto note = [&](std::string_view test, const absl::Status& s) -> absl::Status {
      if (!IsCapabilityError(s)) return s;
      out.notes.push_back(absl::StrCat(std::string(test), " skipped for '", m.id, "': ",
                                       std::string(s.message())));
      return absl::OkStatus();
    };
    if (run_robustness) {
      auto r = Robustness(m, ds, robustness);
      if (r.ok()) {
        out.robustness[i] = std::move(*r);
      } else {
        RETURN_IF_ERROR(note("robustness", r.status()));
      }
    }
    if (run_resilience) {
      auto r = Resilience(m, ds, resilience);
      if (r.ok()) {
        out.resilience[i] = std::move(*r);
      } else {
        RETURN_IF_ERROR(note("resilience", r.status()));
      }
    }
    if (run_reliability) {
      auto r = Reliability(m, ds, reliability);
      if (r.ok()) {
        out.reliability[i] = std::move(*r);
      } else {
        RETURN_IF_ERROR(note("reliability", r.status()));
      }
    }
  }

  auto add = [&](std::string name, bool higher, std::vector<std::optional<double>> values) {
    RankCriterion c;
    c.name = std::move(name);
    c.higher_is_better = higher;
    c.values = std::move(values);
    c.ranks = CompetitionRanks(c.values, higher);
    out.criteria.push_back(std::move(c));
  };
  for (const Metric metric : MetricsFor(task)) {
    std::vector<std::optional<double>> v(k);
    for (int i = 0; i < k; ++i) v[i] = out.accuracy[i].test.Get(metric);
    add(absl::StrCat("test ", std::string(MetricName(metric))), HigherIsBetter(metric), v);
  }
  if (run_robustness) {
    std::vector<std::optional<double>> v(k);
    bool higher = false;
    for (int i = 0; i < k; ++i) {
      if (!out.robustness[i]) continue;
      double sum = 0.0;
      for (const auto& p : out.robustness[i]->points) sum += p.mean;
      v[i] = sum / out.robustness[i]->points.size();
      higher = HigherIsBetter(out.robustness[i]->metric);
    }
    add("robustness mean metric", higher, v);
  }
  if (run_resilience) {
    std::vector<std::optional<double>> v(k);
    bool higher = false;
    for (int i = 0; i < k; ++i) {
      if (!out.resilience[i] || out.resilience[i]->points.empty()) continue;
      v[i] = out.resilience[i]->points.back().metric;
      higher = HigherIsBetter(out.resilience[i]->metric);
    }
    add("resilience metric at smallest ratio", higher, v);
  }
  if (run_reliability) {
    std::vector<std::optional<double>> v(k);
    for (int i = 0; i < k; ++i) {
      if (!out.reliability[i]) continue;
      v[i] = task == TaskKind::kBinary ? out.reliability[i]->mean_set_size
                                       : out.reliability[i]->mean_width;
    }
    add(task == TaskKind::kBinary ? "reliability mean set size"
                                  : "reliability mean interval width",
        false, v);
  }

  out.mean_rank.resize(k);
  for (int i = 0; i < k; ++i) {
    double sum = 0.0;
    int count = 0;
    for (const auto& c : out.criteria) {
      if (c.ranks[i]) {
        sum += *c.ranks[i];
        ++count;
      }
    }
    if (count > 0) out.mean_rank[i] = sum / count;
  }
  const Metric tie_metric = DefaultMetric(task);
  const bool tie_higher = HigherIsBetter(tie_metric);
  out.overall_rank.resize(k);
  auto better = [&](int a, int b) {
    const auto& ma = out.mean_rank[a];
    const auto& mb = out.mean_rank[b];
    if (ma.has_value() != mb.has_value()) return ma.has_value();
    if (ma && *ma != *mb) return *ma < *mb;
    const auto ta = out.accuracy[a].test.Get(tie_metric);
    const auto tb = out.accuracy[b].test.Get(tie_metric);
    if (ta.has_value() != tb.has_value()) return ta.has_value();
    if (!ta) return false;
    return tie_higher ? *ta > *tb : *ta < *tb;
  };
  for (int i = 0; i < k; ++i) {
    int rank = 1;
    for (int j = 0; j < k; ++j) {
      if (better(j, i)) ++rank;
    }
    out.overall_rank[i] = rank;
  }
  return out;
}

}  // namespace workbench
