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

#include "workbench/model.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "workbench/csv.h"
#include "workbench/stats.h"
#include "workbench/status.h"

namespace workbench {

std::string_view ModelFamilyName(ModelFamily family) {
  switch (family) {
    case ModelFamily::kGlm: return "glm";
    case ModelFamily::kGam: return "gam";
    case ModelFamily::kTree: return "tree";
    case ModelFamily::kXgb1: return "xgb1";
    case ModelFamily::kXgb2: return "xgb2";
    case ModelFamily::kRegistered: return "registered";
  }
  return "?";
}

absl::StatusOr<ModelFamily> ParseModelFamily(std::string_view name) {
  for (const ModelFamily f : {ModelFamily::kGlm, ModelFamily::kGam,
                              ModelFamily::kTree, ModelFamily::kXgb1,
                              ModelFamily::kXgb2}) {
    if (ModelFamilyName(f) == name) return f;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unsupported model family '", std::string(name), "'; supported: ", kSupportedFamilies));
}

ModelSpec DefaultSpec(ModelFamily family) {
  ModelSpec spec;
  spec.family = family;
  spec.boost = family == ModelFamily::kXgb2 ? DefaultXgb2Params()
                                            : DefaultXgb1Params();
  return spec;
}

double Sigmoid(double margin) {
  if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

bool TrainedModel::reevaluable() const {
  const auto* reg = std::get_if<RegisteredModel>(&body);
  return reg == nullptr || reg->kind == RegisteredModel::Kind::kCallable;
}

bool TrainedModel::persistable() const {
  const auto* reg = std::get_if<RegisteredModel>(&body);
  return reg == nullptr || reg->kind == RegisteredModel::Kind::kScoreTable;
}

absl::StatusOr<TrainedModel> Train(const Dataset& ds, const ModelSpec& spec,
                                   std::string id) {
  if (!ds.prepared) {
    return absl::FailedPreconditionError(
        "dataset must be prepared (split and imputed) before training");
  }
  RETURN_IF_ERROR(ValidateDataset(ds));
  if (spec.family == ModelFamily::kRegistered) {
    return absl::InvalidArgumentError("registered models are not trainable");
  }
  const auto train_rows = ds.RowsIn(SplitRole::kTrain);
  const Rows rows = ds.MakeRows(train_rows);
  const std::vector<double> y = ds.Targets(train_rows);
  if (!rows.x.allFinite()) {
    return absl::InvalidArgumentError("non-finite feature values in train split");
  }
  for (const double v : y) {
    if (!std::isfinite(v)) {
      return absl::InvalidArgumentError("non-finite target values in train split");
    }
  }
  if (PopulationSd(y) == 0.0) {
    return absl::InvalidArgumentError(
        "degenerate target: zero variance on the train split");
  }
  std::vector<double> weights;
  if (!ds.weights.empty()) {
    for (const int r : train_rows) weights.push_back(ds.weights[r]);
  }

  TrainedModel model;
  model.id = std::move(id);
  model.family = spec.family;
  model.task = ds.task;
  model.schema = ds.FeatureSchema();
  model.spec = spec;
  switch (spec.family) {
    case ModelFamily::kGlm: {
      ASSIGN_OR_RETURN(model.body, FitGlm(model.schema, rows, y, weights,
                                          ds.task, spec.glm));
      break;
    }
    case ModelFamily::kGam: {
      GamParams params = spec.gam;
      params.seed = spec.seed;
      ASSIGN_OR_RETURN(model.body, FitGam(model.schema, rows, y, weights,
                                          ds.task, params));
      break;
    }
    case ModelFamily::kTree: {
      ASSIGN_OR_RETURN(model.body, FitTree(model.schema, rows, y, weights,
                                           ds.task, spec.tree));
      break;
    }
    case ModelFamily::kXgb1:
    case ModelFamily::kXgb2: {
      BoostParams params = spec.boost;
      params.max_depth = spec.family == ModelFamily::kXgb1 ? 1 : 2;
      params.seed = spec.seed;
      ASSIGN_OR_RETURN(BoostedModel boosted,
                       FitBoosted(model.schema, rows, y, weights, ds.task, params));
      if (spec.family == ModelFamily::kXgb1) {
        model.body = Xgb1Model{std::move(boosted)};
      } else {
        model.body = Xgb2Model{std::move(boosted)};
      }
      break;
    }
    case ModelFamily::kRegistered:
      break;
  }
  return model;
}

absl::StatusOr<TrainedModel> RegisterScores(const Dataset& ds,
                                            std::string_view scores_csv,
                                            std::string id,
                                            std::string source) {
  ASSIGN_OR_RETURN(const auto records, ParseCsv(scores_csv));
  if (records.empty() || records[0].size() != 2 || records[0][0] != "row_id" ||
      records[0][1] != "score") {
    return absl::InvalidArgumentError("scores file header must be `row_id,score`");
  }
  const int n = ds.num_rows();
  const int count = static_cast<int>(records.size()) - 1;
  if (count != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "row-count mismatch: scores file has ", count, " rows, dataset has ", n));
  }
  RegisteredModel reg;
  reg.kind = RegisteredModel::Kind::kScoreTable;
  reg.source = std::move(source);
  for (int r = 1; r <= count; ++r) {
    const auto& rec = records[r];
    if (rec.size() != 2) {
      return absl::InvalidArgumentError(absl::StrCat("scores record ", r, " malformed"));
    }
    int64_t row_id = 0;
    double score = 0;
    try {
      size_t used = 0;
      row_id = std::stoll(rec[0], &used);
      if (used != rec[0].size()) throw std::invalid_argument(rec[0]);
      score = std::stod(rec[1], &used);
      if (used != rec[1].size()) throw std::invalid_argument(rec[1]);
    } catch (const std::exception&) {
      return absl::InvalidArgumentError(
          absl::StrCat("scores record ", r, " is not numeric"));
    }
    if (row_id < 0 || row_id >= n) {
      return absl::InvalidArgumentError(
          absl::StrCat("row_id ", row_id, " outside the dataset"));
    }
    if (!std::isfinite(score)) {
      return absl::InvalidArgumentError(absl::StrCat("non-finite score for row ", row_id));
    }
    if (ds.task == TaskKind::kBinary && (score < 0 || score > 1)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "binary score ", score, " for row ", row_id, " outside [0, 1]"));
    }
    if (!reg.scores.emplace(row_id, score).second) {
      return absl::InvalidArgumentError(absl::StrCat("duplicate row_id ", row_id));
    }
  }
  TrainedModel model;
  model.id = std::move(id);
  model.family = ModelFamily::kRegistered;
  model.task = ds.task;
  model.schema = ds.FeatureSchema();
  model.spec.family = ModelFamily::kRegistered;
  model.body = std::move(reg);
  return model;
}

absl::StatusOr<TrainedModel> RegisterScoresFile(const Dataset& ds,
                                                const std::string& path,
                                                std::string id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return RegisterScores(ds, buffer.str(), std::move(id), path);
}

absl::StatusOr<TrainedModel> RegisterCallable(const Dataset& ds,
                                              PredictionFunction function,
                                              std::string id) {
  if (!function) return absl::InvalidArgumentError("empty prediction function");
  RegisteredModel reg;
  reg.kind = RegisteredModel::Kind::kCallable;
  reg.function = std::move(function);
  reg.source = "callable";
  TrainedModel model;
  model.id = std::move(id);
  model.family = ModelFamily::kRegistered;
  model.task = ds.task;
  model.schema = ds.FeatureSchema();
  model.spec.family = ModelFamily::kRegistered;
  model.body = std::move(reg);
  return model;
}

namespace {

absl::StatusOr<std::vector<double>> Evaluate(const TrainedModel& model,
                                             const Rows& rows, bool margin) {
  if (rows.num_features() != model.schema.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "schema mismatch: rows have ", rows.num_features(),
        " features, model expects ", model.schema.size()));
  }
  const int n = rows.size();
  std::vector<double> out(n);
  const bool binary = model.task == TaskKind::kBinary;
  auto link = [&](double m) { return binary && !margin ? Sigmoid(m) : m; };
  if (const auto* glm = std::get_if<GlmModel>(&model.body)) {
    for (int i = 0; i < n; ++i) out[i] = link(GlmMargin(*glm, rows.row(i)));
  } else if (const auto* gam = std::get_if<GamModel>(&model.body)) {
    for (int i = 0; i < n; ++i) out[i] = link(GamMargin(*gam, rows.row(i)));
  } else if (const auto* tree = std::get_if<TreeModel>(&model.body)) {
    for (int i = 0; i < n; ++i) out[i] = TreePredict(*tree, rows.row(i));
  } else if (const auto* x1 = std::get_if<Xgb1Model>(&model.body)) {
    for (int i = 0; i < n; ++i) out[i] = link(x1->boosted.Margin(rows.row(i)));
  } else if (const auto* x2 = std::get_if<Xgb2Model>(&model.body)) {
    for (int i = 0; i < n; ++i) out[i] = link(x2->boosted.Margin(rows.row(i)));
  } else {
    const auto& reg = std::get<RegisteredModel>(model.body);
    if (reg.kind == RegisteredModel::Kind::kCallable) {
      out = reg.function(rows.x);
      if (static_cast<int>(out.size()) != n) {
        return absl::InternalError("registered callable returned wrong row count");
      }
    } else {
      if (static_cast<int>(rows.row_ids.size()) != n) {
        return CapabilityError(
            "pseudo model cannot score synthetic rows (score table only)");
      }
      for (int i = 0; i < n; ++i) {
        const auto it = reg.scores.find(rows.row_ids[i]);
        if (it == reg.scores.end()) {
          return absl::NotFoundError(absl::StrCat(
              "pseudo model has no score for row ", rows.row_ids[i]));
        }
        out[i] = it->second;
      }
    }
  }
  return out;
}

}  // namespace

absl::StatusOr<std::vector<double>> Predict(const TrainedModel& model,
                                            const Rows& rows) {
  return Evaluate(model, rows, /*margin=*/false);
}

absl::StatusOr<std::vector<double>> PredictMargin(const TrainedModel& model,
                                                  const Rows& rows) {
  return Evaluate(model, rows, /*margin=*/true);
}

absl::StatusOr<std::vector<double>> PredictRows(const TrainedModel& model,
                                                const Dataset& ds,
                                                std::span<const int> rows) {
  return Predict(model, ds.MakeRows(rows));
}

}  // namespace workbench
