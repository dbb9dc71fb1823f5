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

#include "workbench/experiment.h"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "workbench/analysis.h"
#include "workbench/model_io.h"
#include "workbench/serialize.h"
#include "workbench/status.h"

namespace workbench {
namespace {

std::string NowIso8601() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

absl::Status Corrupt(std::string_view what) {
  return absl::DataLossError(absl::StrCat("corrupt experiment file: ", std::string(what)));
}

const char* SectionOf(std::string_view verb) {
  if (verb == "interpret") return "interpretations";
  if (verb == "explain") return "explanations";
  if (verb == "diagnose") return "diagnostics";
  return "comparisons";
}

constexpr const char* kSections[] = {"interpretations", "explanations", "diagnostics",
                                     "comparisons"};

}  // namespace

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
  std::string out;
  for (unsigned int i = 0; i < length; ++i) absl::StrAppendFormat(&out, "%02x", digest[i]);
  return out;
}

std::string DumpJson(const Json& j) { return j.dump(2) + "\n"; }

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteFile(const std::string& path, std::string_view contents) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

Json DatasetToJson(const Dataset& ds) {
  Json columns = Json::array();
  for (const Column& c : ds.columns) {
    Json values = Json::array();
    Json missing = Json::array();
    for (int r = 0; r < c.num_rows(); ++r) {
      values.push_back(std::isfinite(c.values[r]) ? Json(c.values[r]) : Json(nullptr));
      if (c.IsMissing(r)) missing.push_back(r);
    }
    columns.push_back({{"name", c.name},
                       {"kind", std::string(ColumnKindName(c.kind))},
                       {"levels", c.levels},
                       {"values", std::move(values)},
                       {"missing", std::move(missing)}});
  }
  Json split = Json::array();
  for (const SplitRole s : ds.split) split.push_back(static_cast<int>(s));
  return {{"name", ds.name},
          {"target", ds.target},
          {"task", std::string(TaskKindName(ds.task))},
          {"prepared", ds.prepared},
          {"columns", std::move(columns)},
          {"split", std::move(split)},
          {"weights", ds.weights}};
}

absl::StatusOr<Dataset> DatasetFromJson(const Json& j, std::string_view path) {
  RETURN_IF_ERROR(CheckKnownKeys(
      j, path, {"name", "target", "task", "prepared", "columns", "split", "weights"}));
  Dataset ds;
  ASSIGN_OR_RETURN(ds.name, GetString(j, "name", path, "data"));
  ASSIGN_OR_RETURN(ds.target, GetString(j, "target", path, std::nullopt));
  ASSIGN_OR_RETURN(const std::string task, GetString(j, "task", path, std::nullopt));
  auto parsed_task = ParseTaskKind(task);
  if (!parsed_task.ok()) return PathError(JoinPath(path, "task"), std::string(parsed_task.status().message()));
  ds.task = *parsed_task;
  ASSIGN_OR_RETURN(ds.prepared, GetBool(j, "prepared", path, false));
  ASSIGN_OR_RETURN(ds.weights, GetDoubleArray(j, "weights", path, std::vector<double>{}));
  const std::string cpath = JoinPath(path, "columns");
  if (!j.contains("columns") || !j["columns"].is_array()) {
    return PathError(cpath, "expected an array");
  }
  for (size_t k = 0; k < j["columns"].size(); ++k) {
    const Json& cj = j["columns"][k];
    const std::string p = JoinPath(cpath, std::to_string(k));
    RETURN_IF_ERROR(CheckKnownKeys(cj, p, {"name", "kind", "levels", "values", "missing"}));
    Column c;
    ASSIGN_OR_RETURN(c.name, GetString(cj, "name", p, std::nullopt));
    ASSIGN_OR_RETURN(const std::string kind, GetString(cj, "kind", p, std::nullopt));
    if (kind == "numeric") {
      c.kind = ColumnKind::kNumeric;
    } else if (kind == "categorical") {
      c.kind = ColumnKind::kCategorical;
    } else {
      return PathError(JoinPath(p, "kind"), "expected numeric|categorical");
    }
    ASSIGN_OR_RETURN(c.levels, GetStringArray(cj, "levels", p, std::vector<std::string>{}));
    if (!cj.contains("values") || !cj["values"].is_array()) {
      return PathError(JoinPath(p, "values"), "expected an array");
    }
    for (const Json& v : cj["values"]) {
      if (v.is_null()) {
        c.values.push_back(std::numeric_limits<double>::quiet_NaN());
      } else if (v.is_number()) {
        c.values.push_back(v.get<double>());
      } else {
        return PathError(JoinPath(p, "values"), "expected numbers or null");
      }
    }
    c.missing.assign(c.values.size(), 0);
    ASSIGN_OR_RETURN(const std::vector<double> missing,
                     GetDoubleArray(cj, "missing", p, std::vector<double>{}));
    for (const double m : missing) {
      if (m < 0 || m >= static_cast<double>(c.values.size())) {
        return PathError(JoinPath(p, "missing"), "row index out of range");
      }
      c.missing[static_cast<size_t>(m)] = 1;
    }
    ds.columns.push_back(std::move(c));
  }
  ASSIGN_OR_RETURN(const std::vector<double> split,
                   GetDoubleArray(j, "split", path, std::vector<double>{}));
  for (const double s : split) {
    if (s != 0 && s != 1) return PathError(JoinPath(path, "split"), "expected 0 or 1");
    ds.split.push_back(s == 0 ? SplitRole::kTrain : SplitRole::kTest);
  }
  RETURN_IF_ERROR(ValidateDataset(ds));
  return ds;
}

std::string ConfigHash(std::string_view verb, std::string_view test, const Json& config) {
  const Json key = {{"verb", std::string(verb)}, {"test", std::string(test)}, {"config", config}};
  return Sha256Hex(key.dump());
}

Json ResultEntryToJson(const ResultEntry& e) {
  Json out = {{"models", e.models},
              {"verb", e.verb},
              {"test", e.test},
              {"config", e.config},
              {"config_hash", e.config_hash},
              {"status", e.ok ? "ok" : "error"}};
  if (e.ok) {
    out["result"] = e.result;
  } else {
    out["error"] = e.error;
    out["error_kind"] = e.error_kind;
  }
  return out;
}

absl::StatusOr<ResultEntry> ResultEntryFromJson(const Json& j, std::string_view path) {
  RETURN_IF_ERROR(CheckKnownKeys(j, path, {"models", "verb", "test", "config", "config_hash",
                                           "status", "result", "error", "error_kind"}));
  ResultEntry e;
  ASSIGN_OR_RETURN(e.models, GetStringArray(j, "models", path, std::nullopt));
  ASSIGN_OR_RETURN(e.verb, GetString(j, "verb", path, std::nullopt));
  ASSIGN_OR_RETURN(e.test, GetString(j, "test", path, std::nullopt));
  ASSIGN_OR_RETURN(e.config_hash, GetString(j, "config_hash", path, std::nullopt));
  ASSIGN_OR_RETURN(const std::string status, GetString(j, "status", path, std::nullopt));
  if (status != "ok" && status != "error") {
    return PathError(JoinPath(path, "status"), "expected ok|error");
  }
  if (!j.contains("config") || !j["config"].is_object()) {
    return PathError(JoinPath(path, "config"), "expected an object");
  }
  e.config = j["config"];
  e.ok = status == "ok";
  if (e.ok) {
    if (!j.contains("result") || !j["result"].is_object()) {
      return PathError(JoinPath(path, "result"), "expected an object");
    }
    e.result = j["result"];
  } else {
    ASSIGN_OR_RETURN(e.error, GetString(j, "error", path, std::nullopt));
    ASSIGN_OR_RETURN(e.error_kind, GetString(j, "error_kind", path, std::nullopt));
  }
  return e;
}

ResultEntry ErrorEntry(std::vector<std::string> models, std::string verb, std::string test,
                       Json config, const absl::Status& status) {
  ResultEntry e;
  e.models = std::move(models);
  e.verb = std::move(verb);
  e.test = std::move(test);
  e.config = config.is_object() ? std::move(config) : Json::object();
  e.config_hash = ConfigHash(e.verb, e.test, e.config);
  e.ok = false;
  const std::string message(status.message());
  if (IsCapabilityError(status)) {
    e.error_kind = "capability";
    e.error = absl::StrCat(e.verb, " not supported: ",
                           message.substr(sizeof(kCapabilityPrefix) - 1));
  } else if (absl::IsInvalidArgument(status) || absl::IsNotFound(status)) {
    e.error_kind = "invalid";
    e.error = message;
  } else {
    e.error_kind = "execution";
    e.error = message;
  }
  return e;
}

Experiment::Experiment(uint64_t seed) : seed_(seed) {
  created_ = NowIso8601();
  updated_ = created_;
}

void Experiment::Touch() { updated_ = NowIso8601(); }

absl::Status Experiment::SetDataset(Dataset ds, Json source) {
  if (!models_.empty()) {
    return absl::FailedPreconditionError(
        "the dataset cannot be replaced once models have been added");
  }
  RETURN_IF_ERROR(ValidateDataset(ds));
  content_hash_ = Sha256Hex(DatasetToJson(ds).dump());
  dataset_ = std::make_shared<const Dataset>(std::move(ds));
  data_source_ = std::move(source);
  results_.clear();
  Touch();
  return absl::OkStatus();
}

const TrainedModel* Experiment::FindModel(std::string_view id) const {
  return FindModelPtr(id).get();
}

std::shared_ptr<const TrainedModel> Experiment::FindModelPtr(std::string_view id) const {
  for (const auto& m : models_) {
    if (m->id == id) return m;
  }
  return nullptr;
}

absl::Status Experiment::AddModel(TrainedModel model) {
  if (!has_data()) return absl::FailedPreconditionError("no dataset loaded");
  if (model.id.empty()) return absl::InvalidArgumentError("model id must not be empty");
  if (FindModel(model.id) != nullptr) {
    return absl::AlreadyExistsError(absl::StrCat("model '", model.id, "' already exists"));
  }
  if (!(model.schema == dataset_->FeatureSchema())) {
    return absl::InvalidArgumentError("model schema does not match the dataset");
  }
  models_.push_back(std::make_shared<const TrainedModel>(std::move(model)));
  Touch();
  return absl::OkStatus();
}

std::string Experiment::NextModelId(std::string_view family) const {
  for (int k = 1;; ++k) {
    std::string id = absl::StrCat(std::string(family), "-", k);
    if (FindModel(id) == nullptr) return id;
  }
}

int Experiment::AddResult(ResultEntry entry) {
  for (size_t i = 0; i < results_.size(); ++i) {
    const ResultEntry& r = results_[i];
    if (r.models == entry.models && r.verb == entry.verb && r.test == entry.test &&
        r.config_hash == entry.config_hash) {
      return static_cast<int>(i);
    }
  }
  results_.push_back(std::move(entry));
  Touch();
  return static_cast<int>(results_.size()) - 1;
}

absl::StatusOr<ResultEntry> Experiment::Analyze(const std::vector<std::string>& model_ids,
                                                std::string_view verb, std::string_view test,
                                                const Json& config) const {
  if (!has_data()) return absl::FailedPreconditionError("no dataset loaded");
  if (!dataset_->prepared) {
    return absl::FailedPreconditionError("dataset must be prepared before analysis");
  }
  std::vector<const TrainedModel*> models;
  for (const std::string& id : model_ids) {
    const TrainedModel* m = FindModel(id);
    if (m == nullptr) return absl::NotFoundError(absl::StrCat("unknown model '", id, "'"));
    models.push_back(m);
  }
  const std::string t = verb == "compare" && test.empty() ? "compare" : std::string(test);
  ASSIGN_OR_RETURN(AnalysisOutput out,
                   RunAnalysisOn(*dataset_, models, verb, t, config, seed_));
  ResultEntry e;
  e.models = model_ids;
  e.verb = std::string(verb);
  e.test = t;
  e.config = std::move(out.config);
  e.config_hash = ConfigHash(e.verb, e.test, e.config);
  e.result = std::move(out.result);
  return e;
}

absl::StatusOr<ResultEntry> Experiment::RunAnalysis(const std::vector<std::string>& model_ids,
                                                    std::string_view verb,
                                                    std::string_view test,
                                                    const Json& config) {
  auto entry = Analyze(model_ids, verb, test, config);
  if (!entry.ok()) {
    AddResult(ErrorEntry(model_ids, std::string(verb), std::string(test), config,
                         entry.status()));
    return entry.status();
  }
  AddResult(*entry);
  return entry;
}

absl::StatusOr<Json> Experiment::ToJson() const {
  Json models = Json::array();
  for (const auto& m : models_) {
    ASSIGN_OR_RETURN(Json mj, ModelToJson(*m));
    models.push_back(std::move(mj));
  }
  Json results = Json::array();
  for (const ResultEntry& e : results_) results.push_back(ResultEntryToJson(e));
  Json data = nullptr;
  if (has_data()) {
    data = {{"source", data_source_},
            {"content_hash", content_hash_},
            {"dataset", DatasetToJson(*dataset_)}};
  }
  return Json{{"schema_version", kExperimentSchemaVersion},
              {"seed", seed_},
              {"created", created_},
              {"updated", updated_},
              {"data", std::move(data)},
              {"models", std::move(models)},
              {"results", std::move(results)}};
}

absl::StatusOr<Experiment> Experiment::FromJson(const Json& j) {
  if (!j.is_object() || !j.contains("schema_version")) {
    return Corrupt("missing schema_version");
  }
  if (!j["schema_version"].is_number_integer()) return Corrupt("schema_version is not an integer");
  const int64_t version = j["schema_version"].get<int64_t>();
  if (version != kExperimentSchemaVersion) {
    return absl::FailedPreconditionError(absl::StrCat(
        "experiment schema version ", version, " requires migration to version ",
        kExperimentSchemaVersion));
  }
  auto structural = [](const absl::Status& s) { return Corrupt(std::string(s.message())); };
  if (auto s = CheckKnownKeys(j, "", {"schema_version", "seed", "created", "updated", "data",
                                      "models", "results"});
      !s.ok()) {
    return structural(s);
  }
  auto seed = GetSeed(j, "seed", "", std::nullopt);
  if (!seed.ok()) return structural(seed.status());
  Experiment exp(*seed);
  auto created = GetString(j, "created", "", "");
  auto updated = GetString(j, "updated", "", "");
  if (!created.ok()) return structural(created.status());
  if (!updated.ok()) return structural(updated.status());
  exp.created_ = *created;
  exp.updated_ = *updated;
  if (j.contains("data") && !j["data"].is_null()) {
    const Json& d = j["data"];
    if (auto s = CheckKnownKeys(d, "/data", {"source", "content_hash", "dataset"}); !s.ok()) {
      return structural(s);
    }
    auto hash = GetString(d, "content_hash", "/data", std::nullopt);
    if (!hash.ok()) return structural(hash.status());
    if (!d.contains("dataset")) return Corrupt("/data/dataset: missing");
    auto ds = DatasetFromJson(d["dataset"], "/data/dataset");
    if (!ds.ok()) return structural(ds.status());
    const std::string actual = Sha256Hex(DatasetToJson(*ds).dump());
    if (actual != *hash) {
      return absl::DataLossError(absl::StrCat(
          "corrupt experiment file: dataset content hash mismatch (stored ", *hash,
          ", computed ", actual, ")"));
    }
    exp.content_hash_ = actual;
    exp.dataset_ = std::make_shared<const Dataset>(std::move(*ds));
    exp.data_source_ = d.contains("source") ? d["source"] : Json(nullptr);
  }
  if (!j.contains("models") || !j["models"].is_array()) return Corrupt("/models: expected an array");
  for (const Json& mj : j["models"]) {
    auto m = ModelFromJson(mj);
    if (!m.ok()) {
      if (absl::IsFailedPrecondition(m.status())) return m.status();
      return structural(m.status());
    }
    if (!exp.has_data() || !(m->schema == exp.dataset_->FeatureSchema())) {
      return Corrupt(absl::StrCat("model '", m->id, "' does not match the dataset"));
    }
    if (exp.FindModel(m->id) != nullptr) {
      return Corrupt(absl::StrCat("duplicate model id '", m->id, "'"));
    }
    exp.models_.push_back(std::make_shared<const TrainedModel>(std::move(*m)));
  }
  if (!j.contains("results") || !j["results"].is_array()) {
    return Corrupt("/results: expected an array");
  }
  for (size_t k = 0; k < j["results"].size(); ++k) {
    auto e = ResultEntryFromJson(j["results"][k], absl::StrCat("/results/", k));
    if (!e.ok()) return structural(e.status());
    exp.results_.push_back(std::move(*e));
  }
  return exp;
}

absl::Status Experiment::Save(const std::string& path) const {
  ASSIGN_OR_RETURN(const Json j, ToJson());
  return WriteFile(path, DumpJson(j));
}

absl::StatusOr<Experiment> Experiment::Load(const std::string& path) {
  ASSIGN_OR_RETURN(const std::string text, ReadFile(path));
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    return Corrupt(e.what());
  }
  return FromJson(j);
}

absl::StatusOr<Json> Experiment::BuildReport(const ReportOptions& options) const {
  if (results_.empty()) {
    return absl::FailedPreconditionError("experiment has no results; nothing to report");
  }
  Json report = {{"report_schema_version", kReportSchemaVersion}, {"seed", seed_}};
  if (has_data()) {
    report["data"] = {{"source", data_source_},
                      {"content_hash", content_hash_},
                      {"num_rows", dataset_->num_rows()},
                      {"target", dataset_->target},
                      {"task", std::string(TaskKindName(dataset_->task))},
                      {"summary", workbench::ToJson(Summarize(*dataset_))}};
  } else {
    report["data"] = nullptr;
  }
  Json models = Json::array();
  for (const auto& m : models_) models.push_back(DescribeModel(*m));
  report["models"] = std::move(models);
  for (const char* section : kSections) report[section] = Json::array();
  for (const ResultEntry& e : results_) {
    report[SectionOf(e.verb)].push_back(ResultEntryToJson(e));
  }
  if (options.include_timestamps) {
    report["timestamps"] = {{"created", created_}, {"updated", updated_}};
  }
  return report;
}

absl::Status Experiment::EmitReport(const std::string& path,
                                    const ReportOptions& options) const {
  ASSIGN_OR_RETURN(const Json report, BuildReport(options));
  RETURN_IF_ERROR(ValidateReport(report));
  return WriteFile(path, DumpJson(report));
}

absl::Status ValidateReport(const Json& report) {
  auto fail = [](std::string_view path, std::string_view message) {
    return absl::InvalidArgumentError(
        absl::StrCat("report ", std::string(path), ": ", std::string(message)));
  };
  if (!report.is_object()) return fail("/", "expected an object");
  for (const auto& [key, value] : report.items()) {
    static const std::set<std::string> known = {
        "report_schema_version", "seed", "data", "models", "interpretations",
        "explanations", "diagnostics", "comparisons", "timestamps"};
    if (!known.contains(key)) return fail("/" + key, "unknown key");
  }
  if (!report.contains("report_schema_version") ||
      report["report_schema_version"] != kReportSchemaVersion) {
    return fail("/report_schema_version", "unsupported or missing");
  }
  if (!report.contains("seed") || !report["seed"].is_number_unsigned()) {
    return fail("/seed", "expected a non-negative integer");
  }
  if (!report.contains("models") || !report["models"].is_array()) {
    return fail("/models", "expected an array");
  }
  std::set<std::string> model_ids;
  for (size_t k = 0; k < report["models"].size(); ++k) {
    const Json& m = report["models"][k];
    if (!m.is_object() || !m.contains("id") || !m["id"].is_string() || !m.contains("family")) {
      return fail(absl::StrCat("/models/", k), "expected {id, family, ...}");
    }
    model_ids.insert(m["id"].get<std::string>());
  }
  int total = 0;
  for (const char* section : kSections) {
    const std::string spath = absl::StrCat("/", section);
    if (!report.contains(section) || !report[section].is_array()) {
      return fail(spath, "expected an array");
    }
    for (size_t k = 0; k < report[section].size(); ++k) {
      const std::string epath = absl::StrCat(spath, "/", k);
      auto entry = ResultEntryFromJson(report[section][k], epath);
      if (!entry.ok()) return fail(epath, std::string(entry.status().message()));
      if (SectionOf(entry->verb) != std::string_view(section)) {
        return fail(JoinPath(epath, "verb"), "entry filed under the wrong section");
      }
      const std::vector<std::string> tests = KnownTests(entry->verb);
      if (std::find(tests.begin(), tests.end(), entry->test) == tests.end()) {
        return fail(JoinPath(epath, "test"), "unknown test");
      }
      if (entry->config_hash != ConfigHash(entry->verb, entry->test, entry->config)) {
        return fail(JoinPath(epath, "config_hash"), "does not match the config");
      }
      for (const std::string& id : entry->models) {
        if (!model_ids.contains(id)) return fail(JoinPath(epath, "models"), "unknown model id");
      }
      if (entry->ok) {
        const Json& body = entry->result;
        if (!body.contains("test") || !body["test"].is_string()) {
          return fail(JoinPath(epath, "result/test"), "missing");
        }
        const std::string name = body["test"].get<std::string>();
        const bool matches = name == entry->test || (entry->test == "pdp" && name == "pdp2");
        if (!matches) return fail(JoinPath(epath, "result/test"), "does not match the entry");
      }
      ++total;
    }
  }
  if (total == 0) return fail("/", "report holds no results");
  return absl::OkStatus();
}

}  // namespace workbench
