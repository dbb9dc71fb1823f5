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

#include "workbench/pipeline.h"

#include <filesystem>

#include "absl/strings/str_cat.h"
#include "workbench/analysis.h"
#include "workbench/model_io.h"
#include "workbench/status.h"

namespace workbench {
namespace {

std::string Resolve(const std::string& base_dir, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

absl::Status LoadData(Experiment& exp, const std::string& path, std::string_view target,
                      std::string_view task) {
  ASSIGN_OR_RETURN(const TaskKind kind, ParseTaskKind(task));
  ASSIGN_OR_RETURN(Dataset ds, LoadCsv(path, target, kind));
  const Json source = {{"path", path},
                       {"target", std::string(target)},
                       {"task", std::string(TaskKindName(kind))}};
  return exp.SetDataset(std::move(ds), source);
}

absl::Status PrepareData(Experiment& exp, double test_ratio, std::optional<uint64_t> seed) {
  if (!exp.has_data()) return absl::FailedPreconditionError("no dataset loaded");
  if (exp.dataset().prepared) {
    return absl::FailedPreconditionError("dataset is already prepared");
  }
  const uint64_t s = seed.value_or(exp.seed());
  ASSIGN_OR_RETURN(Dataset prepared, Prepare(exp.dataset(), test_ratio, s));
  Json source = exp.data_source().is_object() ? exp.data_source() : Json::object();
  source["prepare"] = {{"test_ratio", test_ratio}, {"seed", s}};
  return exp.SetDataset(std::move(prepared), std::move(source));
}

absl::StatusOr<std::string> TrainModel(Experiment& exp, std::string_view family,
                                       const Json& params, std::string id,
                                       std::string_view path) {
  if (!exp.has_data()) return absl::FailedPreconditionError("no dataset loaded");
  ASSIGN_OR_RETURN(const ModelFamily f, ParseModelFamily(family));
  Json p = params.is_null() ? Json::object() : params;
  RETURN_IF_ERROR(CheckObject(p, path));
  if (!p.contains("seed")) p["seed"] = exp.seed();
  ASSIGN_OR_RETURN(const ModelSpec spec, ModelSpecFromJson(f, p, path));
  if (id.empty()) id = exp.NextModelId(ModelFamilyName(f));
  if (exp.FindModel(id) != nullptr) {
    return absl::AlreadyExistsError(absl::StrCat("model '", id, "' already exists"));
  }
  ASSIGN_OR_RETURN(TrainedModel model, Train(exp.dataset(), spec, id));
  RETURN_IF_ERROR(exp.AddModel(std::move(model)));
  return id;
}

absl::StatusOr<std::string> RegisterModel(Experiment& exp, const std::string& scores_path,
                                          std::string id) {
  if (!exp.has_data()) return absl::FailedPreconditionError("no dataset loaded");
  if (id.empty()) id = exp.NextModelId("registered");
  if (exp.FindModel(id) != nullptr) {
    return absl::AlreadyExistsError(absl::StrCat("model '", id, "' already exists"));
  }
  ASSIGN_OR_RETURN(TrainedModel model, RegisterScoresFile(exp.dataset(), scores_path, id));
  RETURN_IF_ERROR(exp.AddModel(std::move(model)));
  return id;
}

absl::StatusOr<Experiment> RunPipeline(const Json& config, const std::string& base_dir) {
  RETURN_IF_ERROR(CheckKnownKeys(config, "",
                                 {"seed", "data", "prepare", "models", "tests", "report",
                                  "experiment"}));
  ASSIGN_OR_RETURN(const uint64_t seed, GetSeed(config, "seed", "", 0));

  // Validate the whole document before doing any work.
  if (!config.contains("data")) return PathError("/data", "required object is missing");
  const Json& data = config["data"];
  RETURN_IF_ERROR(CheckKnownKeys(data, "/data", {"path", "target", "task"}));
  ASSIGN_OR_RETURN(const std::string data_path, GetString(data, "path", "/data", std::nullopt));
  ASSIGN_OR_RETURN(const std::string target, GetString(data, "target", "/data", std::nullopt));
  ASSIGN_OR_RETURN(const std::string task, GetString(data, "task", "/data", std::nullopt));
  if (!ParseTaskKind(task).ok()) {
    return PathError("/data/task", "expected regression|binary");
  }
  const Json prepare = config.contains("prepare") ? config["prepare"] : Json::object();
  RETURN_IF_ERROR(CheckKnownKeys(prepare, "/prepare", {"test_ratio", "seed"}));
  ASSIGN_OR_RETURN(const double test_ratio,
                   GetDouble(prepare, "test_ratio", "/prepare", kDefaultTestRatio));
  if (!(test_ratio > 0 && test_ratio < 1)) {
    return PathError("/prepare/test_ratio", "must lie in (0, 1)");
  }
  ASSIGN_OR_RETURN(const uint64_t prepare_seed, GetSeed(prepare, "seed", "/prepare", seed));

  if (!config.contains("models") || !config["models"].is_array() || config["models"].empty()) {
    return PathError("/models", "expected a non-empty array");
  }
  std::vector<std::string> ids;
  for (size_t k = 0; k < config["models"].size(); ++k) {
    const Json& m = config["models"][k];
    const std::string path = absl::StrCat("/models/", k);
    RETURN_IF_ERROR(CheckKnownKeys(m, path, {"id", "family", "params", "scores"}));
    ASSIGN_OR_RETURN(const std::string family, GetString(m, "family", path, std::nullopt));
    ASSIGN_OR_RETURN(const std::string id, GetString(m, "id", path, ""));
    if (family == "registered") {
      ASSIGN_OR_RETURN(const std::string scores, GetString(m, "scores", path, std::nullopt));
      if (m.contains("params")) return PathError(JoinPath(path, "params"), "not allowed for registered models");
    } else {
      auto f = ParseModelFamily(family);
      if (!f.ok()) return PathError(JoinPath(path, "family"), std::string(f.status().message()));
      if (m.contains("scores")) return PathError(JoinPath(path, "scores"), "only allowed for registered models");
      const Json params = m.contains("params") ? m["params"] : Json::object();
      RETURN_IF_ERROR(ModelSpecFromJson(*f, params, JoinPath(path, "params")).status());
    }
    if (!id.empty()) {
      if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
        return PathError(JoinPath(path, "id"), absl::StrCat("duplicate model id '", id, "'"));
      }
      ids.push_back(id);
    }
  }
  const Json tests = config.contains("tests") ? config["tests"] : Json::array();
  if (!tests.is_array()) return PathError("/tests", "expected an array");
  for (size_t k = 0; k < tests.size(); ++k) {
    const Json& t = tests[k];
    const std::string path = absl::StrCat("/tests/", k);
    RETURN_IF_ERROR(CheckKnownKeys(t, path, {"verb", "test", "models", "config"}));
    ASSIGN_OR_RETURN(const std::string verb, GetString(t, "verb", path, std::nullopt));
    if (!IsKnownVerb(verb)) {
      return PathError(JoinPath(path, "verb"), "expected interpret|explain|diagnose|compare");
    }
    ASSIGN_OR_RETURN(const std::string test, GetString(t, "test", path, verb == "compare" ? "compare" : ""));
    const auto known = KnownTests(verb);
    if (std::find(known.begin(), known.end(), test) == known.end()) {
      return PathError(JoinPath(path, "test"), absl::StrCat("unknown ", verb, " test '", test, "'"));
    }
    ASSIGN_OR_RETURN(const std::vector<std::string> models,
                     GetStringArray(t, "models", path, std::nullopt));
    for (size_t i = 0; i < models.size(); ++i) {
      if (std::find(ids.begin(), ids.end(), models[i]) == ids.end()) {
        return PathError(absl::StrCat(JoinPath(path, "models"), "/", i),
                         absl::StrCat("unknown model id '", models[i], "'"));
      }
    }
    if (t.contains("config") && !t["config"].is_object()) {
      return PathError(JoinPath(path, "config"), "expected an object");
    }
  }
  ASSIGN_OR_RETURN(const std::string report, GetString(config, "report", "", ""));
  ASSIGN_OR_RETURN(const std::string exp_path, GetString(config, "experiment", "", ""));

  Experiment exp(seed);
  RETURN_IF_ERROR(LoadData(exp, Resolve(base_dir, data_path), target, task));
  RETURN_IF_ERROR(PrepareData(exp, test_ratio, prepare_seed));
  for (size_t k = 0; k < config["models"].size(); ++k) {
    const Json& m = config["models"][k];
    const std::string family = m["family"].get<std::string>();
    const std::string id = m.value("id", std::string());
    if (family == "registered") {
      RETURN_IF_ERROR(
          RegisterModel(exp, Resolve(base_dir, m["scores"].get<std::string>()), id).status());
    } else {
      const Json params = m.contains("params") ? m["params"] : Json::object();
      RETURN_IF_ERROR(TrainModel(exp, family, params, id,
                                 absl::StrCat("/models/", k, "/params")).status());
    }
  }
  for (const Json& t : tests) {
    const std::string verb = t["verb"].get<std::string>();
    const std::string test = t.value("test", std::string(verb == "compare" ? "compare" : ""));
    const std::vector<std::string> models = t["models"].get<std::vector<std::string>>();
    const Json c = t.contains("config") ? t["config"] : Json::object();
    // Failures become error entries; the run continues.
    exp.RunAnalysis(models, verb, test, c).IgnoreError();
  }
  if (!report.empty()) RETURN_IF_ERROR(exp.EmitReport(Resolve(base_dir, report)));
  if (!exp_path.empty()) RETURN_IF_ERROR(exp.Save(Resolve(base_dir, exp_path)));
  return exp;
}

absl::StatusOr<Experiment> RunPipelineFile(const std::string& path) {
  ASSIGN_OR_RETURN(const std::string text, ReadFile(path));
  Json config;
  try {
    config = Json::parse(text);
  } catch (const Json::parse_error& e) {
    return absl::InvalidArgumentError(absl::StrCat("pipeline config is not valid JSON: ", e.what()));
  }
  return RunPipeline(config, std::filesystem::path(path).parent_path().string());
}

}  // namespace workbench
