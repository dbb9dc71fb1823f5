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

#include "workbench/serialize.h"

#include <string>

#include "workbench/model.h"

namespace workbench {
namespace {

Json Opt(const std::optional<double>& v) { return OptionalJson(v); }

Json Opt(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }

template <typename T>
Json OptVector(const std::vector<std::optional<T>>& values) {
  Json out = Json::array();
  for (const auto& v : values) out.push_back(Opt(v));
  return out;
}

Json Series(const std::vector<double>& grid, const std::vector<double>& value,
            const std::vector<int>& count) {
  return {{"grid", grid}, {"value", value}, {"count", count}};
}

Json SliceSpecJson(const SliceSpec& spec) {
  return {{"features", spec.features},
          {"binning", std::string(SliceBinningName(spec.binning))},
          {"bins", spec.bins},
          {"min_samples", spec.min_samples ? Json(*spec.min_samples) : Json(nullptr)}};
}

Json AxisJson(const SliceAxis& axis) {
  Json out = {{"feature", axis.feature}, {"kind", std::string(ColumnKindName(axis.kind))}};
  if (axis.kind == ColumnKind::kCategorical) {
    out["levels"] = axis.levels;
  } else {
    out["lo"] = axis.lo;
    out["hi"] = axis.hi;
    out["cuts"] = axis.cuts;
  }
  return out;
}

Json CorrelationJson(const CorrelationMatrix& m) {
  Json values = Json::array();
  for (const auto& row : m.values) values.push_back(OptVector(row));
  return {{"columns", m.columns}, {"values", std::move(values)}};
}

}  // namespace

Json ToJson(const MetricSet& metrics) {
  Json values = Json::object();
  for (const auto& v : metrics.values) values[std::string(MetricName(v.metric))] = Opt(v.value);
  return {{"n", metrics.n}, {"threshold", metrics.threshold}, {"metrics", std::move(values)}};
}

Json ToJson(const EdaSummary& summary) {
  Json numeric = Json::array();
  for (const auto& s : summary.numeric) {
    numeric.push_back({{"column", s.column}, {"count", s.count}, {"mean", s.mean},
                       {"sd", s.sd}, {"min", s.min}, {"q1", s.q1},
                       {"median", s.median}, {"q3", s.q3}, {"max", s.max},
                       {"histogram", {{"edges", s.histogram_edges},
                                      {"count", s.histogram_counts}}}});
  }
  Json categorical = Json::array();
  for (const auto& s : summary.categorical) {
    Json freq = Json::array();
    for (const auto& [level, count] : s.frequencies) freq.push_back({{"level", level}, {"count", count}});
    categorical.push_back({{"column", s.column}, {"frequencies", std::move(freq)},
                           {"missing", s.missing}});
  }
  Json out = {{"test", "summary"},
              {"num_rows", summary.num_rows},
              {"numeric", std::move(numeric)},
              {"categorical", std::move(categorical)},
              {"pearson", CorrelationJson(summary.pearson)},
              {"spearman", CorrelationJson(summary.spearman)},
              {"degenerate_columns", summary.degenerate_columns}};
  out["class_balance"] = summary.class_balance
      ? Json{{"0", (*summary.class_balance)[0]}, {"1", (*summary.class_balance)[1]}}
      : Json(nullptr);
  return out;
}

Json ToJson(const DataQualityReport& report) {
  Json columns = Json::array();
  for (const auto& c : report.columns) {
    columns.push_back({{"column", c.column}, {"missing", c.missing},
                       {"constant", c.constant}, {"outliers", Opt(c.outliers)}});
  }
  return {{"test", "quality"},
          {"num_rows", report.num_rows},
          {"duplicate_rows", report.duplicate_rows},
          {"columns", std::move(columns)}};
}

Json ToJson(const FeatureSelection& selection) {
  Json ranked = Json::array();
  for (const auto& f : selection.ranked) ranked.push_back({{"feature", f.feature}, {"score", f.score}});
  return {{"test", "select"}, {"ranked", std::move(ranked)}, {"truncated", selection.truncated}};
}

Json ToJson(const GlobalInterpretation& result) {
  Json importance = Json::array();
  for (size_t j = 0; j < result.features.size(); ++j) {
    importance.push_back({{"feature", result.features[j]},
                          {"importance", result.importance[j]},
                          {"raw", result.raw_importance[j]}});
  }
  Json curves = Json::array();
  for (const auto& c : result.curves) {
    Json jc = {{"feature", c.feature},
               {"kind", std::string(ColumnKindName(c.kind))},
               {"series", Series(c.grid, c.values, c.counts)}};
    if (c.kind == ColumnKind::kCategorical) jc["levels"] = c.levels;
    curves.push_back(std::move(jc));
  }
  Json pairs = Json::array();
  for (const auto& p : result.pairs) {
    pairs.push_back({{"first", p.first}, {"second", p.second},
                     {"first_edges", p.first_edges}, {"second_edges", p.second_edges},
                     {"rows", p.rows}, {"cols", p.cols}, {"values", p.values},
                     {"importance", p.importance}});
  }
  return {{"test", "global"},
          {"model_id", result.model_id},
          {"family", std::string(ModelFamilyName(result.family))},
          {"importance", std::move(importance)},
          {"curves", std::move(curves)},
          {"pairs", std::move(pairs)},
          {"form", result.form}};
}

Json ToJson(const LocalInterpretation& result) {
  Json contributions = Json::array();
  for (size_t j = 0; j < result.features.size(); ++j) {
    contributions.push_back({{"feature", result.features[j]},
                             {"value", result.contributions[j]}});
  }
  Json pairs = Json::array();
  for (const auto& p : result.pair_contributions) {
    pairs.push_back({{"first", p.first}, {"second", p.second}, {"value", p.value}});
  }
  Json out = {{"test", "local"},
              {"model_id", result.model_id},
              {"family", std::string(ModelFamilyName(result.family))},
              {"base", result.base},
              {"score", result.score},
              {"contributions", std::move(contributions)},
              {"pair_contributions", std::move(pairs)}};
  if (result.family == ModelFamily::kTree) {
    Json path = Json::array();
    for (const auto& c : result.path) {
      Json jc = {{"feature", c.feature}, {"op", c.op}, {"value", c.value}};
      if (c.op == "<=" || c.op == ">") {
        jc["threshold"] = c.threshold;
      } else {
        jc["levels"] = c.levels;
      }
      path.push_back(std::move(jc));
    }
    out["path"] = std::move(path);
  }
  return out;
}

Json ToJson(const PfiResult& result) {
  Json features = Json::array();
  for (const auto& f : result.features) {
    features.push_back({{"feature", f.feature}, {"mean", f.mean}, {"sd", f.sd},
                        {"degradations", f.degradations}});
  }
  return {{"test", "pfi"},
          {"metric", std::string(MetricName(result.metric))},
          {"baseline", result.baseline},
          {"repeats", result.repeats},
          {"seed", result.seed},
          {"features", std::move(features)}};
}

Json ToJson(const PdpCurve& result) {
  Json out = {{"test", "pdp"},
              {"feature", result.feature},
              {"kind", std::string(ColumnKindName(result.kind))},
              {"series", Series(result.grid, result.values, result.counts)}};
  if (result.kind == ColumnKind::kCategorical) out["levels"] = result.levels;
  return out;
}

Json ToJson(const PdpSurface& result) {
  return {{"test", "pdp2"},
          {"first", result.first},
          {"second", result.second},
          {"first_grid", result.first_grid},
          {"second_grid", result.second_grid},
          {"values", result.values}};
}

Json ToJson(const AleCurve& result) {
  std::vector<int> count(result.edges.size(), 0);
  for (size_t b = 0; b < result.counts.size(); ++b) count[b + 1] = result.counts[b];
  return {{"test", "ale"},
          {"feature", result.feature},
          {"series", Series(result.edges, result.values, count)},
          {"local_effects", result.local_effects},
          {"bin_values", result.bin_values},
          {"bin_counts", result.counts}};
}

Json ToJson(const LimeExplanation& result) {
  Json features = Json::array();
  for (size_t k = 0; k < result.features.size(); ++k) {
    features.push_back({{"feature", result.features[k]},
                        {"coefficient", result.coefficients[k]}});
  }
  return {{"test", "lime"},
          {"features", std::move(features)},
          {"intercept", result.intercept},
          {"r2", result.r2},
          {"kernel_width", result.kernel_width},
          {"samples", result.samples},
          {"seed", result.seed}};
}

Json ToJson(const ShapExplanation& result) {
  Json values = Json::array();
  for (size_t j = 0; j < result.features.size(); ++j) {
    values.push_back({{"feature", result.features[j]}, {"value", result.values[j]}});
  }
  return {{"test", "shap"},
          {"mode", result.exact ? "exact" : "sampled"},
          {"base", result.base},
          {"prediction", result.prediction},
          {"values", std::move(values)},
          {"background_rows", result.background_rows},
          {"coalitions", result.coalitions},
          {"seed", result.seed}};
}

Json ToJson(const AccuracyResult& result) {
  return {{"test", "accuracy"},
          {"splits", {{"train", ToJson(result.train)}, {"test", ToJson(result.test)}}}};
}

Json ToJson(const WeakspotResult& result) {
  Json slices = Json::array();
  int weak = 0;
  for (const auto& s : result.slices) {
    slices.push_back({{"bins", s.bins}, {"labels", s.labels}, {"n", s.n},
                      {"metric", s.metric}, {"weak", s.weak}});
    weak += s.weak;
  }
  Json regions = Json::array();
  for (const auto& r : result.regions) {
    regions.push_back({{"feature", r.feature}, {"first_bin", r.first_bin},
                       {"last_bin", r.last_bin}, {"lo", r.lo}, {"hi", r.hi},
                       {"n", r.n}, {"metric", r.metric}});
  }
  Json axes = Json::array();
  for (const auto& a : result.axes) axes.push_back(AxisJson(a));
  return {{"test", "weakspot"},
          {"slice", SliceSpecJson(result.spec)},
          {"metric", std::string(MetricName(result.metric))},
          {"ratio", result.ratio},
          {"min_samples", result.min_samples},
          {"overall", result.overall},
          {"axes", std::move(axes)},
          {"slices", std::move(slices)},
          {"regions", std::move(regions)},
          {"flags", {{"weak_slices", weak}, {"weak_regions", result.regions.size()}}}};
}

Json ToJson(const OverfitResult& result) {
  Json slices = Json::array();
  int overfit = 0, underfit = 0;
  for (const auto& s : result.slices) {
    Json js = {{"bins", s.bins}, {"labels", s.labels}, {"n_train", s.n_train},
               {"n_test", s.n_test}, {"skipped", s.skipped}};
    if (!s.skipped) {
      js["train_metric"] = s.train_metric;
      js["test_metric"] = s.test_metric;
      js["gap"] = s.gap;
      js["overfit"] = s.overfit;
      js["underfit"] = s.underfit;
    }
    overfit += s.overfit;
    underfit += s.underfit;
    slices.push_back(std::move(js));
  }
  Json axes = Json::array();
  for (const auto& a : result.axes) axes.push_back(AxisJson(a));
  return {{"test", "overfit"},
          {"slice", SliceSpecJson(result.spec)},
          {"metric", std::string(MetricName(result.metric))},
          {"delta", result.delta},
          {"min_samples_train", result.min_samples_train},
          {"min_samples_test", result.min_samples_test},
          {"overall_train", result.overall_train},
          {"overall_test", result.overall_test},
          {"axes", std::move(axes)},
          {"slices", std::move(slices)},
          {"flags", {{"overfit_slices", overfit}, {"underfit_slices", underfit}}}};
}

Json ToJson(const ReliabilityResult& result) {
  Json out = {{"test", "reliability"},
              {"task", std::string(TaskKindName(result.task))},
              {"alpha", result.alpha},
              {"calibration_ratio", result.calibration_ratio},
              {"seed", result.seed},
              {"calibration_size", result.calibration_size},
              {"test_size", result.test_size},
              {"rank", result.rank},
              {"q_hat", result.q_hat},
              {"coverage", result.coverage},
              {"recipe", result.recipe},
              {"flags", {{"under_covered", result.coverage < 1.0 - result.alpha}}}};
  if (result.task == TaskKind::kBinary) {
    out["mean_set_size"] = result.mean_set_size;
  } else {
    out["mean_width"] = result.mean_width;
  }
  Json slices = Json::array();
  for (const auto& s : result.slices) {
    slices.push_back({{"label", s.label}, {"n", s.n}, {"coverage", s.coverage},
                      {"mean_width", s.mean_width}});
  }
  out["slices"] = std::move(slices);
  return out;
}

Json ToJson(const RobustnessResult& result) {
  std::vector<double> grid, mean, sd;
  Json points = Json::array();
  for (const auto& p : result.points) {
    grid.push_back(p.scale);
    mean.push_back(p.mean);
    sd.push_back(p.sd);
    points.push_back({{"scale", p.scale}, {"mean", p.mean}, {"sd", p.sd}, {"values", p.values}});
  }
  std::vector<int> count(grid.size(), result.repeats);
  return {{"test", "robustness"},
          {"metric", std::string(MetricName(result.metric))},
          {"baseline", result.baseline},
          {"features", result.features},
          {"repeats", result.repeats},
          {"seed", result.seed},
          {"series", Series(grid, mean, count)},
          {"sd", sd},
          {"points", std::move(points)}};
}

Json ToJson(const ResilienceResult& result) {
  std::vector<double> grid;
  Json value = Json::array();
  std::vector<int> count;
  for (const auto& p : result.points) {
    grid.push_back(p.ratio);
    value.push_back(Opt(p.metric));
    count.push_back(p.n);
  }
  Json clusters = Json::array();
  for (const auto& c : result.clusters) {
    clusters.push_back({{"cluster", c.cluster}, {"n", c.n}, {"metric", Opt(c.metric)}});
  }
  Json psi = Json::array();
  for (const auto& p : result.psi) psi.push_back({{"feature", p.feature}, {"psi", p.psi}});
  Json out = {{"test", "resilience"},
              {"scenario", std::string(ResilienceScenarioName(result.scenario))},
              {"metric", std::string(MetricName(result.metric))},
              {"baseline", result.baseline},
              {"series", {{"grid", grid}, {"value", std::move(value)}, {"count", count}}},
              {"psi", std::move(psi)},
              {"warnings", result.warnings}};
  if (result.scenario == ResilienceScenario::kWorstCluster) {
    out["clusters"] = std::move(clusters);
    out["clusters_used"] = result.clusters_used;
    out["worst_cluster"] = result.worst_cluster;
  }
  return out;
}

namespace {

Json GroupsJson(const std::vector<GroupRate>& groups) {
  Json out = Json::array();
  for (const auto& g : groups) {
    out.push_back({{"group", g.group}, {"n", g.n}, {"favorable_rate", g.favorable_rate},
                   {"air", Opt(g.air)}, {"flagged", g.flagged}, {"excluded", g.excluded}});
  }
  return out;
}

}  // namespace

Json ToJson(const FairnessResult& result) {
  Json segments = Json::array();
  for (const auto& s : result.segments) {
    segments.push_back({{"label", s.label}, {"groups", GroupsJson(s.groups)}});
  }
  Json frontier = Json::array();
  for (const auto& d : result.frontier) {
    Json jd = {{"kind", d.kind}, {"threshold", d.threshold}, {"air", Opt(d.air)},
               {"accuracy", Opt(d.accuracy)}};
    if (d.kind == "binning") jd["bins"] = d.bins;
    frontier.push_back(std::move(jd));
  }
  int flagged = 0;
  for (const auto& g : result.groups) flagged += g.flagged;
  return {{"test", "fairness"},
          {"protected_feature", result.protected_feature},
          {"reference_group", result.reference_group},
          {"threshold", result.threshold},
          {"groups", GroupsJson(result.groups)},
          {"segments", std::move(segments)},
          {"frontier", std::move(frontier)},
          {"warnings", result.warnings},
          {"flags", {{"disparity", flagged > 0}, {"flagged_groups", flagged}}}};
}

Json ToJson(const ComparisonReport& report) {
  Json models = Json::array();
  for (size_t i = 0; i < report.model_ids.size(); ++i) {
    Json m = {{"id", report.model_ids[i]},
              {"accuracy", ToJson(report.accuracy[i])},
              {"mean_rank", Opt(report.mean_rank[i])},
              {"overall_rank", report.overall_rank[i]}};
    if (i < report.robustness.size() && report.robustness[i]) {
      m["robustness"] = ToJson(*report.robustness[i]);
    }
    if (i < report.resilience.size() && report.resilience[i]) {
      m["resilience"] = ToJson(*report.resilience[i]);
    }
    if (i < report.reliability.size() && report.reliability[i]) {
      m["reliability"] = ToJson(*report.reliability[i]);
    }
    models.push_back(std::move(m));
  }
  Json criteria = Json::array();
  for (const auto& c : report.criteria) {
    criteria.push_back({{"name", c.name}, {"higher_is_better", c.higher_is_better},
                        {"values", OptVector(c.values)}, {"ranks", OptVector(c.ranks)}});
  }
  return {{"test", "compare"},
          {"tests", report.tests},
          {"models", std::move(models)},
          {"rank_table", std::move(criteria)},
          {"notes", report.notes}};
}

}  // namespace workbench
