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

#include "workbench/model_io.h"

#include "absl/strings/str_cat.h"
#include "workbench/status.h"

namespace workbench {

Json SchemaToJson(const Schema& schema) {
  Json out = Json::array();
  for (const auto& f : schema.features) {
    Json jf = {{"name", f.name}, {"kind", std::string(ColumnKindName(f.kind))}};
    if (f.kind == ColumnKind::kCategorical) jf["levels"] = f.levels;
    out.push_back(std::move(jf));
  }
  return out;
}

absl::StatusOr<Schema> SchemaFromJson(const Json& j, std::string_view path) {
  if (!j.is_array()) return PathError(path, "expected an array");
  Schema schema;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string p = absl::StrCat(std::string(path), "/", i);
    RETURN_IF_ERROR(CheckObject(j[i], p));
    FeatureInfo f;
    ASSIGN_OR_RETURN(f.name, GetString(j[i], "name", p, std::nullopt));
    ASSIGN_OR_RETURN(const std::string kind, GetString(j[i], "kind", p, std::nullopt));
    if (kind == "numeric") {
      f.kind = ColumnKind::kNumeric;
    } else if (kind == "categorical") {
      f.kind = ColumnKind::kCategorical;
      ASSIGN_OR_RETURN(f.levels, GetStringArray(j[i], "levels", p, std::nullopt));
    } else {
      return PathError(JoinPath(p, "kind"), "expected numeric|categorical");
    }
    schema.features.push_back(std::move(f));
  }
  return schema;
}

Json ModelSpecToJson(const ModelSpec& spec) {
  Json out = {{"seed", spec.seed}};
  switch (spec.family) {
    case ModelFamily::kGlm:
      out["alpha"] = spec.glm.alpha;
      out["l1_ratio"] = spec.glm.l1_ratio;
      out["tolerance"] = spec.glm.tolerance;
      out["max_sweeps"] = spec.glm.max_sweeps;
      out["max_outer_iterations"] = spec.glm.max_outer_iterations;
      break;
    case ModelFamily::kGam:
      out["lambda"] = OptionalJson(spec.gam.lambda);
      out["num_knots"] = spec.gam.num_knots;
      out["max_iterations"] = spec.gam.max_iterations;
      break;
    case ModelFamily::kTree:
      out["max_depth"] = spec.tree.max_depth;
      out["min_samples_leaf"] = spec.tree.min_samples_leaf;
      break;
    case ModelFamily::kXgb1:
    case ModelFamily::kXgb2:
      out["rounds"] = spec.boost.rounds;
      out["learning_rate"] = spec.boost.learning_rate;
      out["max_bins"] = spec.boost.max_bins;
      out["reg_lambda"] = spec.boost.reg_lambda;
      out["min_child_weight"] = spec.boost.min_child_weight;
      out["early_stopping"] = spec.boost.early_stopping;
      out["validation_ratio"] = spec.boost.validation_ratio;
      out["patience"] = spec.boost.patience;
      if (spec.family == ModelFamily::kXgb2) out["purify"] = spec.boost.purify;
      break;
    case ModelFamily::kRegistered:
      break;
  }
  return out;
}

namespace {

absl::Status Range(bool ok, std::string_view path, std::string_view key,
                   std::string_view message) {
  return ok ? absl::OkStatus() : PathError(JoinPath(path, key), message);
}

}  // namespace

absl::StatusOr<ModelSpec> ModelSpecFromJson(ModelFamily family,
                                            const Json& params,
                                            std::string_view path) {
  ModelSpec spec = DefaultSpec(family);
  const Json p = params.is_null() ? Json::object() : params;
  switch (family) {
    case ModelFamily::kGlm: {
      RETURN_IF_ERROR(CheckKnownKeys(p, path, {"seed", "alpha", "l1_ratio", "tolerance",
                                               "max_sweeps", "max_outer_iterations"}));
      auto& g = spec.glm;
      ASSIGN_OR_RETURN(g.alpha, GetDouble(p, "alpha", path, g.alpha));
      RETURN_IF_ERROR(Range(g.alpha >= 0 && std::isfinite(g.alpha), path, "alpha", "must be >= 0"));
      ASSIGN_OR_RETURN(g.l1_ratio, GetDouble(p, "l1_ratio", path, g.l1_ratio));
      RETURN_IF_ERROR(Range(g.l1_ratio >= 0 && g.l1_ratio <= 1, path, "l1_ratio", "must lie in [0, 1]"));
      ASSIGN_OR_RETURN(g.tolerance, GetDouble(p, "tolerance", path, g.tolerance));
      RETURN_IF_ERROR(Range(g.tolerance > 0, path, "tolerance", "must be > 0"));
      ASSIGN_OR_RETURN(const int64_t sweeps, GetInt(p, "max_sweeps", path, g.max_sweeps));
      RETURN_IF_ERROR(Range(sweeps >= 1 && sweeps <= 10000000, path, "max_sweeps", "must lie in [1, 1e7]"));
      g.max_sweeps = static_cast<int>(sweeps);
      ASSIGN_OR_RETURN(const int64_t outer, GetInt(p, "max_outer_iterations", path, g.max_outer_iterations));
      RETURN_IF_ERROR(Range(outer >= 1 && outer <= 10000, path, "max_outer_iterations", "must lie in [1, 10000]"));
      g.max_outer_iterations = static_cast<int>(outer);
      break;
    }
    case ModelFamily::kGam: {
      RETURN_IF_ERROR(CheckKnownKeys(p, path, {"seed", "lambda", "num_knots", "max_iterations"}));
      auto& g = spec.gam;
      if (p.contains("lambda") && !p["lambda"].is_null()) {
        ASSIGN_OR_RETURN(const double lambda, GetDouble(p, "lambda", path, std::nullopt));
        RETURN_IF_ERROR(Range(lambda >= 0 && std::isfinite(lambda), path, "lambda", "must be >= 0"));
        g.lambda = lambda;
      }
      ASSIGN_OR_RETURN(const int64_t knots, GetInt(p, "num_knots", path, g.num_knots));
      RETURN_IF_ERROR(Range(knots >= 1 && knots <= 100, path, "num_knots", "must lie in [1, 100]"));
      g.num_knots = static_cast<int>(knots);
      ASSIGN_OR_RETURN(const int64_t iters, GetInt(p, "max_iterations", path, g.max_iterations));
      RETURN_IF_ERROR(Range(iters >= 1 && iters <= 1000, path, "max_iterations", "must lie in [1, 1000]"));
      g.max_iterations = static_cast<int>(iters);
      break;
    }
    case ModelFamily::kTree: {
      RETURN_IF_ERROR(CheckKnownKeys(p, path, {"seed", "max_depth", "min_samples_leaf"}));
      ASSIGN_OR_RETURN(const int64_t depth, GetInt(p, "max_depth", path, spec.tree.max_depth));
      RETURN_IF_ERROR(Range(depth >= 1 && depth <= 30, path, "max_depth", "must lie in [1, 30]"));
      spec.tree.max_depth = static_cast<int>(depth);
      ASSIGN_OR_RETURN(const int64_t leaf, GetInt(p, "min_samples_leaf", path, spec.tree.min_samples_leaf));
      RETURN_IF_ERROR(Range(leaf >= 1, path, "min_samples_leaf", "must be >= 1"));
      spec.tree.min_samples_leaf = static_cast<int>(leaf);
      break;
    }
    case ModelFamily::kXgb1:
    case ModelFamily::kXgb2: {
      RETURN_IF_ERROR(CheckKnownKeys(
          p, path, {"seed", "rounds", "learning_rate", "max_bins", "reg_lambda",
                    "min_child_weight", "early_stopping", "validation_ratio",
                    "patience", "purify"}));
      auto& b = spec.boost;
      ASSIGN_OR_RETURN(const int64_t rounds, GetInt(p, "rounds", path, b.rounds));
      RETURN_IF_ERROR(Range(rounds >= 1 && rounds <= 100000, path, "rounds", "must lie in [1, 100000]"));
      b.rounds = static_cast<int>(rounds);
      ASSIGN_OR_RETURN(b.learning_rate, GetDouble(p, "learning_rate", path, b.learning_rate));
      RETURN_IF_ERROR(Range(b.learning_rate > 0 && b.learning_rate <= 1, path, "learning_rate", "must lie in (0, 1]"));
      ASSIGN_OR_RETURN(const int64_t bins, GetInt(p, "max_bins", path, b.max_bins));
      RETURN_IF_ERROR(Range(bins >= 2 && bins <= 1024, path, "max_bins", "must lie in [2, 1024]"));
      b.max_bins = static_cast<int>(bins);
      ASSIGN_OR_RETURN(b.reg_lambda, GetDouble(p, "reg_lambda", path, b.reg_lambda));
      RETURN_IF_ERROR(Range(b.reg_lambda >= 0, path, "reg_lambda", "must be >= 0"));
      ASSIGN_OR_RETURN(b.min_child_weight, GetDouble(p, "min_child_weight", path, b.min_child_weight));
      RETURN_IF_ERROR(Range(b.min_child_weight >= 0, path, "min_child_weight", "must be >= 0"));
      ASSIGN_OR_RETURN(b.early_stopping, GetBool(p, "early_stopping", path, b.early_stopping));
      ASSIGN_OR_RETURN(b.validation_ratio, GetDouble(p, "validation_ratio", path, b.validation_ratio));
      RETURN_IF_ERROR(Range(b.validation_ratio > 0 && b.validation_ratio < 1, path, "validation_ratio", "must lie in (0, 1)"));
      ASSIGN_OR_RETURN(const int64_t patience, GetInt(p, "patience", path, b.patience));
      RETURN_IF_ERROR(Range(patience >= 1, path, "patience", "must be >= 1"));
      b.patience = static_cast<int>(patience);
      if (family == ModelFamily::kXgb2) {
        ASSIGN_OR_RETURN(b.purify, GetBool(p, "purify", path, b.purify));
      } else if (p.contains("purify")) {
        return PathError(JoinPath(path, "purify"), "only valid for xgb2");
      }
      break;
    }
    case ModelFamily::kRegistered:
      break;
  }
  ASSIGN_OR_RETURN(spec.seed, GetSeed(p, "seed", path, spec.seed));
  return spec;
}

namespace {

Json BoostedToJson(const BoostedModel& m) {
  Json binning = Json::array();
  for (const auto& fb : m.binning) {
    Json jb = {{"kind", std::string(ColumnKindName(fb.kind))},
               {"lo", fb.edges.lo},
               {"hi", fb.edges.hi},
               {"cuts", fb.edges.cuts},
               {"constant", fb.edges.constant},
               {"quantile_fallback", fb.edges.quantile_fallback}};
    if (fb.kind == ColumnKind::kCategorical) {
      jb["level_encoding"] = fb.level_encoding;
      jb["unseen_level_value"] = fb.unseen_level_value;
    }
    binning.push_back(std::move(jb));
  }
  Json trees = Json::array();
  for (const auto& t : m.trees) {
    Json nodes = Json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back({n.feature, n.cut, n.left, n.right, n.value});
    }
    trees.push_back(std::move(nodes));
  }
  Json pairs = Json::array();
  for (const auto& p : m.effects.pairs) {
    pairs.push_back({{"first", p.first},
                     {"second", p.second},
                     {"rows", p.rows},
                     {"cols", p.cols},
                     {"values", p.values},
                     {"weights", p.weights}});
  }
  return {{"loss", m.loss == BoostLoss::kSquared ? "squared" : "logistic"},
          {"base_score", m.base_score},
          {"binning", std::move(binning)},
          {"trees", std::move(trees)},
          {"best_rounds", m.best_rounds},
          {"train_loss", m.train_loss},
          {"validation_loss", m.validation_loss},
          {"effects",
           {{"intercept", m.effects.intercept},
            {"main", m.effects.main},
            {"main_weights", m.effects.main_weights},
            {"pairs", std::move(pairs)},
            {"purified", m.effects.purified}}}};
}

BoostedModel BoostedFromJson(const Json& j, const BoostParams& params) {
  BoostedModel m;
  m.params = params;
  m.loss = j.at("loss") == "squared" ? BoostLoss::kSquared : BoostLoss::kLogistic;
  m.base_score = j.at("base_score").get<double>();
  for (const auto& jb : j.at("binning")) {
    FeatureBinning fb;
    fb.kind = jb.at("kind") == "numeric" ? ColumnKind::kNumeric : ColumnKind::kCategorical;
    fb.edges.lo = jb.at("lo").get<double>();
    fb.edges.hi = jb.at("hi").get<double>();
    fb.edges.cuts = jb.at("cuts").get<std::vector<double>>();
    fb.edges.constant = jb.at("constant").get<bool>();
    fb.edges.quantile_fallback = jb.at("quantile_fallback").get<bool>();
    if (fb.kind == ColumnKind::kCategorical) {
      fb.level_encoding = jb.at("level_encoding").get<std::vector<double>>();
      fb.unseen_level_value = jb.at("unseen_level_value").get<double>();
    }
    m.binning.push_back(std::move(fb));
  }
  for (const auto& jt : j.at("trees")) {
    BoostedTree t;
    for (const auto& jn : jt) {
      t.nodes.push_back({jn.at(0).get<int>(), jn.at(1).get<int>(), jn.at(2).get<int>(),
                         jn.at(3).get<int>(), jn.at(4).get<double>()});
    }
    m.trees.push_back(std::move(t));
  }
  m.best_rounds = j.at("best_rounds").get<int>();
  m.train_loss = j.at("train_loss").get<std::vector<double>>();
  m.validation_loss = j.at("validation_loss").get<std::vector<double>>();
  const Json& e = j.at("effects");
  m.effects.intercept = e.at("intercept").get<double>();
  m.effects.main = e.at("main").get<std::vector<std::vector<double>>>();
  m.effects.main_weights = e.at("main_weights").get<std::vector<std::vector<double>>>();
  m.effects.purified = e.at("purified").get<bool>();
  for (const auto& jp : e.at("pairs")) {
    PairEffect p;
    p.first = jp.at("first").get<int>();
    p.second = jp.at("second").get<int>();
    p.rows = jp.at("rows").get<int>();
    p.cols = jp.at("cols").get<int>();
    p.values = jp.at("values").get<std::vector<double>>();
    p.weights = jp.at("weights").get<std::vector<double>>();
    m.effects.pairs.push_back(std::move(p));
  }
  return m;
}

Json BodyToJson(const TrainedModel& model) {
  if (const auto* glm = std::get_if<GlmModel>(&model.body)) {
    Json terms = Json::array();
    for (const auto& t : glm->terms) {
      terms.push_back({{"feature", t.feature}, {"level", t.level}, {"name", t.name},
                       {"mean", t.mean}, {"sd", t.sd}});
    }
    return {{"logistic", glm->logistic}, {"terms", std::move(terms)},
            {"coefficients", glm->coefficients}, {"intercept", glm->intercept},
            {"iterations", glm->iterations}, {"converged", glm->converged}};
  }
  if (const auto* gam = std::get_if<GamModel>(&model.body)) {
    Json shapes = Json::array();
    for (const auto& s : gam->shapes) {
      Json js = {{"feature", s.feature}, {"kind", std::string(ColumnKindName(s.kind))}};
      if (s.kind == ColumnKind::kNumeric) {
        js["lo"] = s.basis.lo();
        js["hi"] = s.basis.hi();
        js["interior_knots"] = s.basis.interior_knots();
        js["coefficients"] = s.coefficients;
        js["offset"] = s.offset;
      } else {
        js["level_values"] = s.level_values;
      }
      shapes.push_back(std::move(js));
    }
    Json losses = Json::array();
    for (const auto& [l, v] : gam->validation_losses) losses.push_back({l, v});
    return {{"logistic", gam->logistic}, {"lambda", gam->lambda},
            {"lambda_selected", gam->lambda_selected},
            {"validation_losses", std::move(losses)},
            {"intercept", gam->intercept}, {"shapes", std::move(shapes)},
            {"iterations", gam->iterations}};
  }
  if (const auto* tree = std::get_if<TreeModel>(&model.body)) {
    Json nodes = Json::array();
    for (const auto& n : tree->nodes) {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold},
                       {"left_levels", n.left_levels}, {"left", n.left},
                       {"right", n.right}, {"value", n.value},
                       {"count", n.count}, {"gain", n.gain}});
    }
    return {{"classification", tree->classification}, {"nodes", std::move(nodes)}};
  }
  if (const auto* x1 = std::get_if<Xgb1Model>(&model.body)) return BoostedToJson(x1->boosted);
  if (const auto* x2 = std::get_if<Xgb2Model>(&model.body)) return BoostedToJson(x2->boosted);
  const auto& reg = std::get<RegisteredModel>(model.body);
  Json scores = Json::array();
  for (const auto& [row, score] : reg.scores) scores.push_back({row, score});
  return {{"kind", "score_table"}, {"source", reg.source}, {"scores", std::move(scores)}};
}

}  // namespace

absl::StatusOr<Json> ModelToJson(const TrainedModel& model) {
  if (!model.persistable()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "model '", model.id, "' wraps an in-process callable and cannot be saved"));
  }
  return Json{{"schema_version", kModelSchemaVersion},
              {"id", model.id},
              {"family", std::string(ModelFamilyName(model.family))},
              {"task", std::string(TaskKindName(model.task))},
              {"schema", SchemaToJson(model.schema)},
              {"spec", ModelSpecToJson(model.spec)},
              {"body", BodyToJson(model)}};
}

absl::StatusOr<TrainedModel> ModelFromJson(const Json& j) {
  RETURN_IF_ERROR(CheckObject(j, ""));
  ASSIGN_OR_RETURN(const int64_t version, GetInt(j, "schema_version", "", std::nullopt));
  if (version != kModelSchemaVersion) {
    return absl::FailedPreconditionError(absl::StrCat(
        "model schema version ", version, " is not supported (expected ",
        kModelSchemaVersion, ")"));
  }
  TrainedModel model;
  ASSIGN_OR_RETURN(model.id, GetString(j, "id", "", std::nullopt));
  ASSIGN_OR_RETURN(const std::string family, GetString(j, "family", "", std::nullopt));
  ASSIGN_OR_RETURN(const std::string task, GetString(j, "task", "", std::nullopt));
  ASSIGN_OR_RETURN(model.task, ParseTaskKind(task));
  ASSIGN_OR_RETURN(model.schema, SchemaFromJson(j.value("schema", Json()), "/schema"));
  if (family == "registered") {
    model.family = ModelFamily::kRegistered;
    model.spec.family = ModelFamily::kRegistered;
  } else {
    ASSIGN_OR_RETURN(model.family, ParseModelFamily(family));
    ASSIGN_OR_RETURN(model.spec,
                     ModelSpecFromJson(model.family, j.value("spec", Json()), "/spec"));
  }
  try {
    const Json& body = j.at("body");
    switch (model.family) {
      case ModelFamily::kGlm: {
        GlmModel m;
        m.params = model.spec.glm;
        m.logistic = body.at("logistic").get<bool>();
        for (const auto& t : body.at("terms")) {
          m.terms.push_back({t.at("feature").get<int>(), t.at("level").get<int>(),
                             t.at("name").get<std::string>(), t.at("mean").get<double>(),
                             t.at("sd").get<double>()});
        }
        m.coefficients = body.at("coefficients").get<std::vector<double>>();
        m.intercept = body.at("intercept").get<double>();
        m.iterations = body.at("iterations").get<int>();
        m.converged = body.at("converged").get<bool>();
        model.body = std::move(m);
        break;
      }
      case ModelFamily::kGam: {
        GamModel m;
        m.params = model.spec.gam;
        m.logistic = body.at("logistic").get<bool>();
        m.lambda = body.at("lambda").get<double>();
        m.lambda_selected = body.at("lambda_selected").get<bool>();
        for (const auto& lv : body.at("validation_losses")) {
          m.validation_losses.emplace_back(lv.at(0).get<double>(), lv.at(1).get<double>());
        }
        m.intercept = body.at("intercept").get<double>();
        m.iterations = body.at("iterations").get<int>();
        for (const auto& js : body.at("shapes")) {
          GamShape s;
          s.feature = js.at("feature").get<int>();
          s.kind = js.at("kind") == "numeric" ? ColumnKind::kNumeric : ColumnKind::kCategorical;
          if (s.kind == ColumnKind::kNumeric) {
            s.basis = CubicBSplineBasis(js.at("lo").get<double>(), js.at("hi").get<double>(),
                                        js.at("interior_knots").get<std::vector<double>>());
            s.coefficients = js.at("coefficients").get<std::vector<double>>();
            s.offset = js.at("offset").get<double>();
          } else {
            s.level_values = js.at("level_values").get<std::vector<double>>();
          }
          m.shapes.push_back(std::move(s));
        }
        model.body = std::move(m);
        break;
      }
      case ModelFamily::kTree: {
        TreeModel m;
        m.params = model.spec.tree;
        m.classification = body.at("classification").get<bool>();
        for (const auto& jn : body.at("nodes")) {
          TreeNode n;
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left_levels = jn.at("left_levels").get<std::vector<int>>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
          n.value = jn.at("value").get<double>();
          n.count = jn.at("count").get<int>();
          n.gain = jn.at("gain").get<double>();
          m.nodes.push_back(std::move(n));
        }
        model.body = std::move(m);
        break;
      }
      case ModelFamily::kXgb1:
        model.body = Xgb1Model{BoostedFromJson(body, model.spec.boost)};
        break;
      case ModelFamily::kXgb2:
        model.body = Xgb2Model{BoostedFromJson(body, model.spec.boost)};
        break;
      case ModelFamily::kRegistered: {
        RegisteredModel reg;
        reg.kind = RegisteredModel::Kind::kScoreTable;
        reg.source = body.at("source").get<std::string>();
        for (const auto& rs : body.at("scores")) {
          reg.scores.emplace(rs.at(0).get<int64_t>(), rs.at(1).get<double>());
        }
        model.body = std::move(reg);
        break;
      }
    }
  } catch (const Json::exception& e) {
    return absl::DataLossError(absl::StrCat("malformed model body: ", e.what()));
  }
  return model;
}

Json DescribeModel(const TrainedModel& model) {
  Json out = {{"id", model.id},
              {"family", std::string(ModelFamilyName(model.family))},
              {"task", std::string(TaskKindName(model.task))},
              {"interpretable", model.interpretable()},
              {"reevaluable", model.reevaluable()},
              {"num_features", model.schema.size()}};
  if (model.family != ModelFamily::kRegistered) {
    out["params"] = ModelSpecToJson(model.spec);
  }
  if (const auto* x = std::get_if<Xgb1Model>(&model.body)) {
    out["rounds"] = x->boosted.best_rounds;
  } else if (const auto* x2 = std::get_if<Xgb2Model>(&model.body)) {
    out["rounds"] = x2->boosted.best_rounds;
    out["purified"] = x2->boosted.effects.purified;
    out["num_pairs"] = x2->boosted.effects.pairs.size();
  } else if (const auto* gam = std::get_if<GamModel>(&model.body)) {
    out["lambda"] = gam->lambda;
  } else if (const auto* tree = std::get_if<TreeModel>(&model.body)) {
    out["num_nodes"] = tree->nodes.size();
  } else if (const auto* reg = std::get_if<RegisteredModel>(&model.body)) {
    out["kind"] = reg->kind == RegisteredModel::Kind::kScoreTable ? "score_table" : "callable";
  }
  return out;
}

}  // namespace workbench
