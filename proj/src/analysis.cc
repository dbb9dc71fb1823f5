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

#include "workbench/analysis.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "workbench/compare.h"
#include "workbench/diagnose.h"
#include "workbench/explain.h"
#include "workbench/interpret.h"
#include "workbench/serialize.h"
#include "workbench/status.h"

namespace workbench {
namespace {

absl::StatusOr<std::optional<Metric>> GetMetric(const Json& j, std::string_view path) {
  if (!j.contains("metric") || j["metric"].is_null()) return std::optional<Metric>();
  ASSIGN_OR_RETURN(const std::string name, GetString(j, "metric", path, std::nullopt));
  auto metric = ParseMetric(name);
  if (!metric.ok()) return PathError(JoinPath(path, "metric"), std::string(metric.status().message()));
  return std::optional<Metric>(*metric);
}

Json MetricJson(const std::optional<Metric>& m) {
  return m ? Json(std::string(MetricName(*m))) : Json(nullptr);
}

absl::Status CheckFeature(const Schema& schema, const std::string& name,
                          std::string_view path, std::string_view key,
                          bool numeric_only) {
  const int j = schema.IndexOf(name);
  if (j < 0) {
    return PathError(JoinPath(path, key), absl::StrCat("unknown feature '", name, "'"));
  }
  if (numeric_only && schema.features[j].kind != ColumnKind::kNumeric) {
    return PathError(JoinPath(path, key), absl::StrCat("feature '", name, "' is not numeric"));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> FirstNumeric(const Schema& schema, std::string_view path) {
  for (const auto& f : schema.features) {
    if (f.kind == ColumnKind::kNumeric) return f.name;
  }
  return PathError(path, "no numeric feature available");
}

absl::StatusOr<std::string> GetFeature(const Json& j, std::string_view key,
                                       const Schema& schema, std::string_view path,
                                       bool numeric_only) {
  std::string name;
  if (j.contains(std::string(key)) && !j[std::string(key)].is_null()) {
    ASSIGN_OR_RETURN(name, GetString(j, key, path, std::nullopt));
  } else {
    ASSIGN_OR_RETURN(name, FirstNumeric(schema, JoinPath(path, key)));
  }
  RETURN_IF_ERROR(CheckFeature(schema, name, path, key, numeric_only));
  return name;
}

absl::StatusOr<int> GetRow(const Json& j, const Dataset& ds, std::string_view path) {
  const std::vector<int> test = ds.RowsIn(SplitRole::kTest);
  const int fallback = test.empty() ? 0 : test.front();
  ASSIGN_OR_RETURN(const int64_t row, GetInt(j, "row", path, fallback));
  if (row < 0 || row >= ds.num_rows()) {
    return PathError(JoinPath(path, "row"), absl::StrCat("row must lie in [0, ", ds.num_rows(), ")"));
  }
  return static_cast<int>(row);
}

std::vector<double> Instance(const Dataset& ds, int row) {
  const int r[] = {row};
  const Rows rows = ds.MakeRows(r);
  return std::vector<double>(rows.row(0).begin(), rows.row(0).end());
}

absl::StatusOr<int> GetPositiveInt(const Json& j, std::string_view key,
                                   std::string_view path, int fallback, int max) {
  ASSIGN_OR_RETURN(const int64_t v, GetInt(j, key, path, fallback));
  if (v < 1 || v > max) {
    return PathError(JoinPath(path, key), absl::StrCat("must lie in [1, ", max, "]"));
  }
  return static_cast<int>(v);
}

absl::StatusOr<SliceSpec> GetSlice(const Json& j, const Schema& schema,
                                   std::string_view path, Json* normalized) {
  SliceSpec spec;
  if (j.contains("features") && !j["features"].is_null()) {
    ASSIGN_OR_RETURN(spec.features, GetStringArray(j, "features", path, std::nullopt));
  } else {
    ASSIGN_OR_RETURN(const std::string first, FirstNumeric(schema, JoinPath(path, "features")));
    spec.features = {first};
  }
  if (spec.features.empty() || spec.features.size() > 2) {
    return PathError(JoinPath(path, "features"), "expected one or two features");
  }
  for (size_t k = 0; k < spec.features.size(); ++k) {
    RETURN_IF_ERROR(CheckFeature(schema, spec.features[k], JoinPath(path, "features"),
                                 std::to_string(k), false));
  }
  ASSIGN_OR_RETURN(const std::string binning, GetString(j, "binning", path, "quantile"));
  auto parsed = ParseSliceBinning(binning);
  if (!parsed.ok()) return PathError(JoinPath(path, "binning"), std::string(parsed.status().message()));
  spec.binning = *parsed;
  ASSIGN_OR_RETURN(spec.bins, GetPositiveInt(j, "bins", path, 10, 1000));
  if (j.contains("min_samples") && !j["min_samples"].is_null()) {
    ASSIGN_OR_RETURN(const int m, GetPositiveInt(j, "min_samples", path, 1, 1 << 30));
    spec.min_samples = m;
  }
  (*normalized)["features"] = spec.features;
  (*normalized)["binning"] = std::string(SliceBinningName(spec.binning));
  (*normalized)["bins"] = spec.bins;
  (*normalized)["min_samples"] = spec.min_samples ? Json(*spec.min_samples) : Json(nullptr);
  return spec;
}

absl::StatusOr<double> GetUnit(const Json& j, std::string_view key, std::string_view path,
                               double fallback) {
  ASSIGN_OR_RETURN(const double v, GetDouble(j, key, path, fallback));
  if (!(v > 0 && v < 1)) return PathError(JoinPath(path, key), "must lie in (0, 1)");
  return v;
}

const TrainedModel& Single(std::span<const TrainedModel* const> models) {
  return *models.front();
}

absl::StatusOr<AnalysisOutput> RunInterpret(const Dataset& ds, const TrainedModel& model,
                                            std::string_view test, const Json& c,
                                            std::string_view path) {
  AnalysisOutput out;
  if (test == "global") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {}));
    ASSIGN_OR_RETURN(const GlobalInterpretation g, InterpretGlobal(model, ds));
    out.config = Json::object();
    out.result = ToJson(g);
    return out;
  }
  RETURN_IF_ERROR(CheckKnownKeys(c, path, {"row"}));
  ASSIGN_OR_RETURN(const int row, GetRow(c, ds, path));
  ASSIGN_OR_RETURN(const LocalInterpretation l, InterpretLocal(model, Instance(ds, row)));
  out.config = {{"row", row}};
  out.result = ToJson(l);
  return out;
}

absl::StatusOr<AnalysisOutput> RunExplain(const Dataset& ds, const TrainedModel& model,
                                          std::string_view test, const Json& c,
                                          uint64_t default_seed, std::string_view path) {
  const Schema& schema = model.schema;
  AnalysisOutput out;
  if (test == "pfi") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"metric", "repeats", "seed"}));
    PfiOptions o;
    ASSIGN_OR_RETURN(o.metric, GetMetric(c, path));
    ASSIGN_OR_RETURN(o.repeats, GetPositiveInt(c, "repeats", path, 5, 1000));
    ASSIGN_OR_RETURN(o.seed, GetSeed(c, "seed", path, default_seed));
    ASSIGN_OR_RETURN(const PfiResult r, Pfi(model, ds, o));
    out.config = {{"metric", MetricJson(o.metric)}, {"repeats", o.repeats}, {"seed", o.seed}};
    out.result = ToJson(r);
  } else if (test == "pdp") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"feature", "features", "grid"}));
    PdpOptions o;
    ASSIGN_OR_RETURN(o.grid, GetPositiveInt(c, "grid", path, 20, 1000));
    if (o.grid < 2) return PathError(JoinPath(path, "grid"), "must be >= 2");
    std::vector<std::string> features;
    if (c.contains("features") && !c["features"].is_null()) {
      ASSIGN_OR_RETURN(features, GetStringArray(c, "features", path, std::nullopt));
      if (features.empty() || features.size() > 2) {
        return PathError(JoinPath(path, "features"), "expected one or two features");
      }
      for (size_t k = 0; k < features.size(); ++k) {
        RETURN_IF_ERROR(CheckFeature(schema, features[k], JoinPath(path, "features"),
                                     std::to_string(k), features.size() == 2));
      }
    } else {
      ASSIGN_OR_RETURN(const std::string f, GetFeature(c, "feature", schema, path, false));
      features = {f};
    }
    out.config = {{"features", features}, {"grid", o.grid}};
    if (features.size() == 1) {
      ASSIGN_OR_RETURN(const PdpCurve r, Pdp(model, ds, features[0], o));
      out.result = ToJson(r);
    } else {
      ASSIGN_OR_RETURN(const PdpSurface r, Pdp2(model, ds, features[0], features[1], o));
      out.result = ToJson(r);
    }
  } else if (test == "ale") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"feature", "bins"}));
    AleOptions o;
    ASSIGN_OR_RETURN(o.bins, GetPositiveInt(c, "bins", path, 20, 1000));
    ASSIGN_OR_RETURN(const std::string f, GetFeature(c, "feature", schema, path, true));
    ASSIGN_OR_RETURN(const AleCurve r, Ale(model, ds, f, o));
    out.config = {{"feature", f}, {"bins", o.bins}};
    out.result = ToJson(r);
  } else if (test == "lime") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"row", "samples", "max_features", "ridge", "seed"}));
    LimeOptions o;
    ASSIGN_OR_RETURN(const int row, GetRow(c, ds, path));
    ASSIGN_OR_RETURN(o.samples, GetPositiveInt(c, "samples", path, 1000, 1000000));
    ASSIGN_OR_RETURN(o.max_features, GetPositiveInt(c, "max_features", path, 10, 10000));
    ASSIGN_OR_RETURN(o.ridge, GetDouble(c, "ridge", path, 1e-3));
    if (!(o.ridge >= 0)) return PathError(JoinPath(path, "ridge"), "must be >= 0");
    ASSIGN_OR_RETURN(o.seed, GetSeed(c, "seed", path, default_seed));
    ASSIGN_OR_RETURN(const LimeExplanation r, Lime(model, ds, Instance(ds, row), o));
    out.config = {{"row", row}, {"samples", o.samples}, {"max_features", o.max_features},
                  {"ridge", o.ridge}, {"seed", o.seed}};
    out.result = ToJson(r);
  } else {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"row", "background_size", "coalitions", "seed"}));
    ShapOptions o;
    ASSIGN_OR_RETURN(const int row, GetRow(c, ds, path));
    ASSIGN_OR_RETURN(o.background_size, GetPositiveInt(c, "background_size", path, 100, 100000));
    ASSIGN_OR_RETURN(o.coalitions, GetPositiveInt(c, "coalitions", path, 2048, 1000000));
    ASSIGN_OR_RETURN(o.seed, GetSeed(c, "seed", path, default_seed));
    ASSIGN_OR_RETURN(const ShapExplanation r, Shap(model, ds, Instance(ds, row), o));
    out.config = {{"row", row}, {"background_size", o.background_size},
                  {"coalitions", o.coalitions}, {"seed", o.seed}};
    out.result = ToJson(r);
  }
  return out;
}

absl::StatusOr<RobustnessOptions> GetRobustness(const Json& c, const Schema& schema,
                                                uint64_t default_seed, std::string_view path,
                                                Json* normalized) {
  RobustnessOptions o;
  ASSIGN_OR_RETURN(o.scales, GetDoubleArray(c, "scales", path, o.scales));
  for (size_t k = 0; k < o.scales.size(); ++k) {
    if (!(o.scales[k] >= 0) || !std::isfinite(o.scales[k])) {
      return PathError(absl::StrCat(JoinPath(path, "scales"), "/", k), "must be finite and >= 0");
    }
  }
  if (o.scales.empty()) return PathError(JoinPath(path, "scales"), "must not be empty");
  ASSIGN_OR_RETURN(o.repeats, GetPositiveInt(c, "repeats", path, 10, 10000));
  ASSIGN_OR_RETURN(o.seed, GetSeed(c, "seed", path, default_seed));
  ASSIGN_OR_RETURN(o.features, GetStringArray(c, "features", path, std::vector<std::string>{}));
  for (size_t k = 0; k < o.features.size(); ++k) {
    RETURN_IF_ERROR(CheckFeature(schema, o.features[k], JoinPath(path, "features"),
                                 std::to_string(k), true));
  }
  ASSIGN_OR_RETURN(o.metric, GetMetric(c, path));
  *normalized = {{"scales", o.scales}, {"repeats", o.repeats}, {"seed", o.seed},
                 {"features", o.features}, {"metric", MetricJson(o.metric)}};
  return o;
}

absl::StatusOr<ResilienceOptions> GetResilience(const Json& c, uint64_t default_seed,
                                                std::string_view path, Json* normalized) {
  ResilienceOptions o;
  ASSIGN_OR_RETURN(const std::string scenario, GetString(c, "scenario", path, "worst-sample"));
  auto parsed = ParseResilienceScenario(scenario);
  if (!parsed.ok()) return PathError(JoinPath(path, "scenario"), std::string(parsed.status().message()));
  o.scenario = *parsed;
  ASSIGN_OR_RETURN(o.ratios, GetDoubleArray(c, "ratios", path, o.ratios));
  for (size_t k = 0; k < o.ratios.size(); ++k) {
    if (!(o.ratios[k] > 0 && o.ratios[k] <= 1)) {
      return PathError(absl::StrCat(JoinPath(path, "ratios"), "/", k), "must lie in (0, 1]");
    }
  }
  ASSIGN_OR_RETURN(o.metric, GetMetric(c, path));
  ASSIGN_OR_RETURN(o.clusters, GetPositiveInt(c, "clusters", path, 10, 1000));
  ASSIGN_OR_RETURN(o.restarts, GetPositiveInt(c, "restarts", path, 20, 1000));
  ASSIGN_OR_RETURN(o.seed, GetSeed(c, "seed", path, default_seed));
  ASSIGN_OR_RETURN(o.min_rows, GetPositiveInt(c, "min_rows", path, 100, 1 << 30));
  ASSIGN_OR_RETURN(o.psi_bins, GetPositiveInt(c, "psi_bins", path, 10, 1000));
  ASSIGN_OR_RETURN(o.psi_ratio, GetDouble(c, "psi_ratio", path, 0.1));
  if (!(o.psi_ratio > 0 && o.psi_ratio <= 1)) {
    return PathError(JoinPath(path, "psi_ratio"), "must lie in (0, 1]");
  }
  *normalized = {{"scenario", std::string(ResilienceScenarioName(o.scenario))},
                 {"ratios", o.ratios}, {"metric", MetricJson(o.metric)},
                 {"clusters", o.clusters}, {"restarts", o.restarts}, {"seed", o.seed},
                 {"min_rows", o.min_rows}, {"psi_bins", o.psi_bins},
                 {"psi_ratio", o.psi_ratio}};
  return o;
}

absl::StatusOr<ReliabilityOptions> GetReliability(const Json& c, const Schema& schema,
                                                  uint64_t default_seed, std::string_view path,
                                                  Json* normalized) {
  ReliabilityOptions o;
  ASSIGN_OR_RETURN(o.alpha, GetUnit(c, "alpha", path, 0.1));
  ASSIGN_OR_RETURN(o.calibration_ratio, GetUnit(c, "calibration_ratio", path, 0.2));
  ASSIGN_OR_RETURN(o.seed, GetSeed(c, "seed", path, default_seed));
  *normalized = {{"alpha", o.alpha}, {"calibration_ratio", o.calibration_ratio},
                 {"seed", o.seed}, {"slice", nullptr}};
  if (c.contains("slice") && !c["slice"].is_null()) {
    const std::string slice_path = JoinPath(path, "slice");
    RETURN_IF_ERROR(CheckKnownKeys(c["slice"], slice_path,
                                   {"features", "binning", "bins", "min_samples"}));
    Json slice = Json::object();
    ASSIGN_OR_RETURN(SliceSpec spec, GetSlice(c["slice"], schema, slice_path, &slice));
    o.slice = std::move(spec);
    (*normalized)["slice"] = std::move(slice);
  }
  return o;
}

absl::StatusOr<AnalysisOutput> RunDiagnose(const Dataset& ds, const TrainedModel& model,
                                           std::string_view test, const Json& c,
                                           uint64_t default_seed, std::string_view path) {
  const Schema& schema = model.schema;
  AnalysisOutput out;
  if (test == "accuracy") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"threshold"}));
    ASSIGN_OR_RETURN(const double t, GetDouble(c, "threshold", path, 0.5));
    ASSIGN_OR_RETURN(const AccuracyResult r, Accuracy(model, ds, t));
    out.config = {{"threshold", t}};
    out.result = ToJson(r);
  } else if (test == "weakspot") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"features", "binning", "bins", "min_samples", "ratio"}));
    out.config = Json::object();
    ASSIGN_OR_RETURN(const SliceSpec spec, GetSlice(c, schema, path, &out.config));
    ASSIGN_OR_RETURN(const double ratio, GetDouble(c, "ratio", path, 1.1));
    if (!(ratio > 0)) return PathError(JoinPath(path, "ratio"), "must be > 0");
    out.config["ratio"] = ratio;
    ASSIGN_OR_RETURN(const WeakspotResult r, Weakspot(model, ds, spec, ratio));
    out.result = ToJson(r);
  } else if (test == "overfit") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"features", "binning", "bins", "min_samples", "delta"}));
    out.config = Json::object();
    ASSIGN_OR_RETURN(const SliceSpec spec, GetSlice(c, schema, path, &out.config));
    std::optional<double> delta;
    if (c.contains("delta") && !c["delta"].is_null()) {
      ASSIGN_OR_RETURN(const double d, GetDouble(c, "delta", path, std::nullopt));
      if (!(d >= 0)) return PathError(JoinPath(path, "delta"), "must be >= 0");
      delta = d;
    }
    out.config["delta"] = OptionalJson(delta);
    ASSIGN_OR_RETURN(const OverfitResult r, OverfitUnderfit(model, ds, spec, delta));
    out.result = ToJson(r);
  } else if (test == "reliability") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"alpha", "calibration_ratio", "seed", "slice"}));
    ASSIGN_OR_RETURN(const ReliabilityOptions o,
                     GetReliability(c, schema, default_seed, path, &out.config));
    ASSIGN_OR_RETURN(const ReliabilityResult r, Reliability(model, ds, o));
    out.result = ToJson(r);
  } else if (test == "robustness") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"scales", "repeats", "seed", "features", "metric"}));
    ASSIGN_OR_RETURN(const RobustnessOptions o,
                     GetRobustness(c, schema, default_seed, path, &out.config));
    ASSIGN_OR_RETURN(const RobustnessResult r, Robustness(model, ds, o));
    out.result = ToJson(r);
  } else if (test == "resilience") {
    RETURN_IF_ERROR(CheckKnownKeys(c, path, {"scenario", "ratios", "metric", "clusters",
                                             "restarts", "seed", "min_rows", "psi_bins",
                                             "psi_ratio"}));
    ASSIGN_OR_RETURN(const ResilienceOptions o,
                     GetResilience(c, default_seed, path, &out.config));
    ASSIGN_OR_RETURN(const ResilienceResult r, Resilience(model, ds, o));
    out.result = ToJson(r);
  } else {
    RETURN_IF_ERROR(CheckKnownKeys(
        c, path, {"protected", "protected_cuts", "reference", "threshold", "min_group_size",
                  "segment_feature", "segment_bins", "debias", "debias_feature",
                  "debias_bins"}));
    FairnessOptions o;
    ASSIGN_OR_RETURN(o.protected_feature, GetString(c, "protected", path, std::nullopt));
    RETURN_IF_ERROR(CheckFeature(schema, o.protected_feature, path, "protected", false));
    ASSIGN_OR_RETURN(o.protected_cuts, GetDoubleArray(c, "protected_cuts", path, std::vector<double>{}));
    ASSIGN_OR_RETURN(o.reference_group, GetString(c, "reference", path, std::nullopt));
    ASSIGN_OR_RETURN(o.threshold, GetDouble(c, "threshold", path, 0.5));
    ASSIGN_OR_RETURN(o.min_group_size, GetPositiveInt(c, "min_group_size", path, 30, 1 << 30));
    ASSIGN_OR_RETURN(o.segment_feature, GetString(c, "segment_feature", path, ""));
    if (!o.segment_feature.empty()) {
      RETURN_IF_ERROR(CheckFeature(schema, o.segment_feature, path, "segment_feature", false));
    }
    ASSIGN_OR_RETURN(o.segment_bins, GetPositiveInt(c, "segment_bins", path, 5, 1000));
    ASSIGN_OR_RETURN(o.debias, GetBool(c, "debias", path, true));
    ASSIGN_OR_RETURN(o.debias_feature, GetString(c, "debias_feature", path, ""));
    if (!o.debias_feature.empty()) {
      RETURN_IF_ERROR(CheckFeature(schema, o.debias_feature, path, "debias_feature", true));
    }
    ASSIGN_OR_RETURN(const std::vector<double> bins,
                     GetDoubleArray(c, "debias_bins", path, std::vector<double>{2, 3, 5, 10}));
    o.debias_bins.clear();
    for (size_t k = 0; k < bins.size(); ++k) {
      if (!(bins[k] >= 1) || bins[k] != std::floor(bins[k])) {
        return PathError(absl::StrCat(JoinPath(path, "debias_bins"), "/", k),
                         "expected a positive integer");
      }
      o.debias_bins.push_back(static_cast<int>(bins[k]));
    }
    out.config = {{"protected", o.protected_feature}, {"protected_cuts", o.protected_cuts},
                  {"reference", o.reference_group}, {"threshold", o.threshold},
                  {"min_group_size", o.min_group_size},
                  {"segment_feature", o.segment_feature}, {"segment_bins", o.segment_bins},
                  {"debias", o.debias}, {"debias_feature", o.debias_feature},
                  {"debias_bins", o.debias_bins}};
    ASSIGN_OR_RETURN(const FairnessResult r, Fairness(model, ds, o));
    out.result = ToJson(r);
  }
  return out;
}

absl::StatusOr<AnalysisOutput> RunCompare(const Dataset& ds,
                                          std::span<const TrainedModel* const> models,
                                          const Json& c, uint64_t default_seed,
                                          std::string_view path) {
  RETURN_IF_ERROR(CheckKnownKeys(c, path, {"tests", "seed", "threshold", "robustness",
                                           "resilience", "reliability"}));
  CompareOptions o;
  ASSIGN_OR_RETURN(o.tests, GetStringArray(c, "tests", path, o.tests));
  for (size_t k = 0; k < o.tests.size(); ++k) {
    const auto& t = o.tests[k];
    if (t != "accuracy" && t != "robustness" && t != "resilience" && t != "reliability") {
      return PathError(absl::StrCat(JoinPath(path, "tests"), "/", k),
                       "expected accuracy|robustness|resilience|reliability");
    }
  }
  ASSIGN_OR_RETURN(o.seed, GetSeed(c, "seed", path, default_seed));
  ASSIGN_OR_RETURN(o.threshold, GetDouble(c, "threshold", path, 0.5));
  const Schema& schema = models.front()->schema;
  Json rob, res, rel;
  const Json empty = Json::object();
  auto sub = [&](const char* key) -> const Json& {
    return c.contains(key) && !c[key].is_null() ? c[key] : empty;
  };
  RETURN_IF_ERROR(CheckKnownKeys(sub("robustness"), JoinPath(path, "robustness"),
                                 {"scales", "repeats", "features", "metric"}));
  RETURN_IF_ERROR(CheckKnownKeys(sub("resilience"), JoinPath(path, "resilience"),
                                 {"scenario", "ratios", "metric", "clusters", "restarts",
                                  "min_rows", "psi_bins", "psi_ratio"}));
  RETURN_IF_ERROR(CheckKnownKeys(sub("reliability"), JoinPath(path, "reliability"),
                                 {"alpha", "calibration_ratio", "slice"}));
  ASSIGN_OR_RETURN(o.robustness, GetRobustness(sub("robustness"), schema, o.seed,
                                               JoinPath(path, "robustness"), &rob));
  ASSIGN_OR_RETURN(o.resilience, GetResilience(sub("resilience"), o.seed,
                                               JoinPath(path, "resilience"), &res));
  ASSIGN_OR_RETURN(o.reliability, GetReliability(sub("reliability"), schema, o.seed,
                                                 JoinPath(path, "reliability"), &rel));
  rob.erase("seed");
  res.erase("seed");
  rel.erase("seed");
  ASSIGN_OR_RETURN(const ComparisonReport r, Compare(models, ds, o));
  AnalysisOutput out;
  out.config = {{"tests", o.tests}, {"seed", o.seed}, {"threshold", o.threshold},
                {"robustness", rob}, {"resilience", res}, {"reliability", rel}};
  out.result = ToJson(r);
  return out;
}

}  // namespace

std::vector<std::string> KnownTests(std::string_view verb) {
  if (verb == "interpret") return {"global", "local"};
  if (verb == "explain") return {"pfi", "pdp", "ale", "lime", "shap"};
  if (verb == "diagnose") {
    return {"accuracy", "weakspot", "overfit", "reliability",
            "robustness", "resilience", "fairness"};
  }
  if (verb == "compare") return {"compare"};
  return {};
}

bool IsKnownVerb(std::string_view verb) { return !KnownTests(verb).empty(); }

absl::StatusOr<AnalysisOutput> RunAnalysisOn(
    const Dataset& ds, std::span<const TrainedModel* const> models,
    std::string_view verb, std::string_view test, const Json& config,
    uint64_t default_seed, std::string_view path) {
  if (!IsKnownVerb(verb)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown verb '", std::string(verb), "' (expected interpret|explain|diagnose|compare)"));
  }
  const std::vector<std::string> tests = KnownTests(verb);
  const std::string t = verb == "compare" && test.empty() ? "compare" : std::string(test);
  if (std::find(tests.begin(), tests.end(), t) == tests.end()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "unknown ", std::string(verb), " test '", t, "' (expected ",
        absl::StrJoin(tests, "|"), ")"));
  }
  const Json c = config.is_null() ? Json::object() : config;
  RETURN_IF_ERROR(CheckObject(c, path));
  if (models.empty()) return absl::InvalidArgumentError("no model selected");
  if (verb != "compare" && models.size() != 1) {
    return absl::InvalidArgumentError(absl::StrCat(std::string(verb), " takes exactly one model"));
  }
  for (const TrainedModel* m : models) {
    if (!(m->schema == ds.FeatureSchema())) {
      return absl::InvalidArgumentError(absl::StrCat(
          "model '", m->id, "' does not match the dataset schema"));
    }
  }
  if (verb == "interpret") return RunInterpret(ds, Single(models), t, c, path);
  if (verb == "explain") return RunExplain(ds, Single(models), t, c, default_seed, path);
  if (verb == "diagnose") return RunDiagnose(ds, Single(models), t, c, default_seed, path);
  return RunCompare(ds, models, c, default_seed, path);
}

}  // namespace workbench
