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

#include "workbench/interpret.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "workbench/model_io.h"
#include "workbench/stats.h"
#include "workbench/status.h"

namespace workbench {

absl::Status CheckInterpretable(const TrainedModel& model) {
  if (!model.interpretable()) {
    return CapabilityError(absl::StrCat(
        "model_interpret() is not valid for registered model '", model.id,
        "'; use model_explain() or model_diagnose()"));
  }
  return absl::OkStatus();
}

namespace {

const BoostedModel* Boosted(const TrainedModel& model) {
  if (const auto* x1 = std::get_if<Xgb1Model>(&model.body)) return &x1->boosted;
  if (const auto* x2 = std::get_if<Xgb2Model>(&model.body)) return &x2->boosted;
  return nullptr;
}

const GamShape* FindShape(const GamModel& gam, int feature) {
  for (const auto& s : gam.shapes) {
    if (s.feature == feature) return &s;
  }
  return nullptr;
}

double GlmFeatureEffect(const GlmModel& glm, int feature,
                        std::span<const double> row) {
  double sum = 0.0;
  for (size_t t = 0; t < glm.terms.size(); ++t) {
    const GlmTerm& term = glm.terms[t];
    if (term.feature != feature) continue;
    sum += glm.coefficients[t] * (GlmTermValue(term, row) - term.mean);
  }
  return sum;
}

std::vector<double> TrainWeights(const Dataset& ds, std::span<const int> rows) {
  std::vector<double> w(rows.size(), 1.0);
  if (!ds.weights.empty()) {
    for (size_t i = 0; i < rows.size(); ++i) w[i] = ds.weights[rows[i]];
  }
  return w;
}

std::vector<int> TrainRows(const Dataset& ds) {
  std::vector<int> rows = ds.RowsIn(SplitRole::kTrain);
  if (rows.empty()) rows = ds.AllRows();
  return rows;
}

Json ModelForm(const TrainedModel& model) {
  if (const auto* glm = std::get_if<GlmModel>(&model.body)) {
    Json coefs = Json::array();
    for (size_t t = 0; t < glm->terms.size(); ++t) {
      coefs.push_back({{"term", glm->terms[t].name},
                       {"coefficient", glm->coefficients[t]}});
    }
    return {{"intercept", glm->intercept},
            {"link", glm->logistic ? "logit" : "identity"},
            {"coefficients", std::move(coefs)},
            {"converged", glm->converged}};
  }
  if (const auto* gam = std::get_if<GamModel>(&model.body)) {
    return {{"intercept", gam->intercept},
            {"lambda", gam->lambda},
            {"lambda_selected", gam->lambda_selected},
            {"link", gam->logistic ? "logit" : "identity"}};
  }
  if (const auto* tree = std::get_if<TreeModel>(&model.body)) {
    Json nodes = Json::array();
    for (const auto& n : tree->nodes) {
      Json jn = {{"value", n.value}, {"count", n.count}};
      if (!n.is_leaf()) {
        const FeatureInfo& f = model.schema.features[n.feature];
        jn["feature"] = f.name;
        if (f.kind == ColumnKind::kNumeric) {
          jn["threshold"] = n.threshold;
        } else {
          std::vector<std::string> levels;
          for (const int l : n.left_levels) levels.push_back(f.levels[l]);
          jn["left_levels"] = levels;
        }
        jn["left"] = n.left;
        jn["right"] = n.right;
        jn["gain"] = n.gain;
      }
      nodes.push_back(std::move(jn));
    }
    return {{"nodes", std::move(nodes)}};
  }
  const BoostedModel* b = Boosted(model);
  return {{"intercept", b->effects.intercept},
          {"base_score", b->base_score},
          {"rounds", b->best_rounds},
          {"num_pairs", b->effects.pairs.size()},
          {"purified", b->effects.purified}};
}

}  // namespace

absl::StatusOr<double> MainEffect(const TrainedModel& model, int feature,
                                  double value) {
  RETURN_IF_ERROR(CheckInterpretable(model));
  if (feature < 0 || feature >= model.schema.size()) {
    return absl::OutOfRangeError(absl::StrCat("feature index ", feature));
  }
  if (const auto* glm = std::get_if<GlmModel>(&model.body)) {
    std::vector<double> row(model.schema.size(), 0.0);
    row[feature] = value;
    return GlmFeatureEffect(*glm, feature, row);
  }
  if (const auto* gam = std::get_if<GamModel>(&model.body)) {
    const GamShape* shape = FindShape(*gam, feature);
    return shape == nullptr ? 0.0 : shape->Evaluate(value);
  }
  if (const BoostedModel* b = Boosted(model)) {
    return b->effects.main[feature][b->binning[feature].Bin(value)];
  }
  return absl::InvalidArgumentError("trees have no additive main effects");
}

absl::StatusOr<GlobalInterpretation> InterpretGlobal(const TrainedModel& model,
                                                     const Dataset& ds) {
  RETURN_IF_ERROR(CheckInterpretable(model));
  if (!(ds.FeatureSchema() == model.schema)) {
    return absl::InvalidArgumentError("dataset schema does not match the model");
  }
  const int d = model.schema.size();
  const std::vector<int> train = TrainRows(ds);
  const std::vector<double> w = TrainWeights(ds, train);
  const Rows rows = ds.MakeRows(train);
  const int n = rows.size();

  GlobalInterpretation out;
  out.model_id = model.id;
  out.family = model.family;
  for (const auto& f : model.schema.features) out.features.push_back(f.name);
  out.raw_importance.assign(d, 0.0);
  out.form = ModelForm(model);

  const BoostedModel* boosted = Boosted(model);
  if (const auto* glm = std::get_if<GlmModel>(&model.body)) {
    for (size_t t = 0; t < glm->terms.size(); ++t) {
      out.raw_importance[glm->terms[t].feature] +=
          std::abs(glm->coefficients[t]) * glm->terms[t].sd;
    }
  } else if (const auto* tree = std::get_if<TreeModel>(&model.body)) {
    out.raw_importance = TreeImpurityDecrease(*tree, d);
  } else {
    std::vector<double> f(n);
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < n; ++i) {
        ASSIGN_OR_RETURN(f[i], MainEffect(model, j, rows.x(i, j)));
      }
      out.raw_importance[j] = WeightedVariance(f, w);
    }
  }
  if (boosted != nullptr) {
    std::vector<double> f(n);
    for (const auto& p : boosted->effects.pairs) {
      PairSurface s;
      s.first = model.schema.features[p.first].name;
      s.second = model.schema.features[p.second].name;
      s.first_edges = boosted->binning[p.first].edges.Edges();
      s.second_edges = boosted->binning[p.second].edges.Edges();
      s.rows = p.rows;
      s.cols = p.cols;
      s.values = p.values;
      for (int i = 0; i < n; ++i) {
        f[i] = p.at(boosted->binning[p.first].Bin(rows.x(i, p.first)),
                    boosted->binning[p.second].Bin(rows.x(i, p.second)));
      }
      s.importance = WeightedVariance(f, w);
      out.pairs.push_back(std::move(s));
    }
  }

  double total = 0.0;
  for (const double v : out.raw_importance) total += v;
  for (const auto& p : out.pairs) total += p.importance;
  out.importance.assign(d, 0.0);
  if (total > 0) {
    for (int j = 0; j < d; ++j) out.importance[j] = out.raw_importance[j] / total;
    for (auto& p : out.pairs) p.importance /= total;
  }

  if (model.family == ModelFamily::kTree) return out;
  for (int j = 0; j < d; ++j) {
    const FeatureInfo& info = model.schema.features[j];
    EffectCurve curve;
    curve.feature = info.name;
    curve.kind = info.kind;
    if (info.kind == ColumnKind::kCategorical) {
      curve.levels = info.levels;
      curve.counts.assign(info.levels.size(), 0);
      for (int i = 0; i < n; ++i) {
        const int code = static_cast<int>(rows.x(i, j));
        if (code >= 0 && code < static_cast<int>(info.levels.size())) ++curve.counts[code];
      }
      for (size_t l = 0; l < info.levels.size(); ++l) {
        curve.grid.push_back(static_cast<double>(l));
        ASSIGN_OR_RETURN(const double v, MainEffect(model, j, static_cast<double>(l)));
        curve.values.push_back(v);
      }
    } else {
      double lo = 0, hi = 0;
      if (n > 0) {
        lo = rows.x.col(j).minCoeff();
        hi = rows.x.col(j).maxCoeff();
      }
      const int g = hi > lo ? kEffectGridPoints : 1;
      for (int k = 0; k < g; ++k) {
        const double x = g == 1 ? lo : lo + (hi - lo) * k / (g - 1);
        curve.grid.push_back(x);
        ASSIGN_OR_RETURN(const double v, MainEffect(model, j, x));
        curve.values.push_back(v);
      }
      curve.counts.assign(g, 0);
      for (int i = 0; i < n; ++i) {
        const double x = rows.x(i, j);
        const int k = static_cast<int>(
            std::lower_bound(curve.grid.begin(), curve.grid.end(), x) - curve.grid.begin());
        ++curve.counts[std::min(k, g - 1)];
      }
    }
    out.curves.push_back(std::move(curve));
  }
  return out;
}

absl::StatusOr<LocalInterpretation> InterpretLocal(
    const TrainedModel& model, std::span<const double> instance) {
  RETURN_IF_ERROR(CheckInterpretable(model));
  const int d = model.schema.size();
  if (static_cast<int>(instance.size()) != d) {
    return absl::InvalidArgumentError(absl::StrCat(
        "instance has ", instance.size(), " features, model expects ", d));
  }
  LocalInterpretation out;
  out.model_id = model.id;
  out.family = model.family;
  for (const auto& f : model.schema.features) out.features.push_back(f.name);
  out.contributions.assign(d, 0.0);

  if (const auto* glm = std::get_if<GlmModel>(&model.body)) {
    out.base = glm->intercept;
    for (size_t t = 0; t < glm->terms.size(); ++t) {
      out.base += glm->coefficients[t] * glm->terms[t].mean;
    }
    for (int j = 0; j < d; ++j) out.contributions[j] = GlmFeatureEffect(*glm, j, instance);
    out.score = GlmMargin(*glm, instance);
  } else if (const auto* gam = std::get_if<GamModel>(&model.body)) {
    out.base = gam->intercept;
    for (const auto& s : gam->shapes) out.contributions[s.feature] += s.Evaluate(instance[s.feature]);
    out.score = GamMargin(*gam, instance);
  } else if (const auto* tree = std::get_if<TreeModel>(&model.body)) {
    const std::vector<int> path = TreePath(*tree, instance);
    out.base = tree->nodes[path.front()].value;
    for (size_t k = 0; k + 1 < path.size(); ++k) {
      const TreeNode& node = tree->nodes[path[k]];
      const TreeNode& child = tree->nodes[path[k + 1]];
      out.contributions[node.feature] += child.value - node.value;
      const FeatureInfo& info = model.schema.features[node.feature];
      const bool left = path[k + 1] == node.left;
      PathCondition c;
      c.feature = info.name;
      c.feature_index = node.feature;
      c.value = instance[node.feature];
      if (info.kind == ColumnKind::kNumeric) {
        c.op = left ? "<=" : ">";
        c.threshold = node.threshold;
      } else {
        c.op = left ? "in" : "not in";
        for (const int l : node.left_levels) c.levels.push_back(info.levels[l]);
      }
      out.path.push_back(std::move(c));
    }
    out.score = tree->nodes[path.back()].value;
  } else {
    const BoostedModel* b = Boosted(model);
    const std::vector<int> bins = b->Bins(instance);
    out.base = b->effects.intercept;
    for (int j = 0; j < d; ++j) out.contributions[j] = b->effects.main[j][bins[j]];
    for (const auto& p : b->effects.pairs) {
      out.pair_contributions.push_back({model.schema.features[p.first].name,
                                        model.schema.features[p.second].name,
                                        p.at(bins[p.first], bins[p.second])});
    }
    out.score = b->effects.Evaluate(bins);
  }
  return out;
}

absl::StatusOr<LocalInterpretation> InterpretLocalRow(const TrainedModel& model,
                                                      const Dataset& ds,
                                                      int row) {
  if (row < 0 || row >= ds.num_rows()) {
    return absl::OutOfRangeError(absl::StrCat("row ", row, " is out of range"));
  }
  const int r[] = {row};
  const Rows rows = ds.MakeRows(r);
  return InterpretLocal(model, rows.row(0));
}

}  // namespace workbench
