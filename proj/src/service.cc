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

#include "workbench/service.h"

#include <cstdlib>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "httplib.h"
#include "workbench/analysis.h"
#include "workbench/interpret.h"
#include "workbench/model_io.h"
#include "workbench/pipeline.h"
#include "workbench/serialize.h"
#include "workbench/status.h"

namespace workbench {
namespace {

const char* StateName(int state) {
  static const char* kNames[] = {"queued", "running", "done", "failed"};
  return kNames[state];
}

HttpResponse Error(const absl::Status& status) {
  const int code = HttpStatusFor(status);
  return {code, ErrorBody(code, status)};
}

HttpResponse BadRequest(std::string_view message) {
  return Error(absl::InvalidArgumentError(std::string(message)));
}

Json PathItem(const char* method, const char* summary, const char* body_schema,
              std::vector<int> codes) {
  Json responses = Json::object();
  for (const int c : codes) {
    const char* text = c == 200   ? "OK"
                       : c == 201 ? "Created"
                       : c == 202 ? "Accepted; body {job_id}"
                       : c == 400 ? "Invalid body; error.field names the offending key"
                       : c == 404 ? "Unknown model or job"
                       : c == 409 ? "Conflicting mutation or state"
                       : c == 422 ? "Capability violation"
                                  : "Error";
    responses[std::to_string(c)] = {
        {"description", text},
        {"content", {{"application/json", {{"schema", {{"type", "object"}}}}}}}};
  }
  Json op = {{"summary", summary}, {"responses", responses}};
  if (body_schema != nullptr) {
    op["requestBody"] = {
        {"required", true},
        {"content",
         {{"application/json", {{"schema", Json::parse(body_schema)}}}}}};
  }
  return {{method, op}};
}

}  // namespace

int HttpStatusFor(const absl::Status& status) {
  if (IsCapabilityError(status)) return 422;
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      return 400;
    case absl::StatusCode::kNotFound:
      return 404;
    case absl::StatusCode::kAlreadyExists:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kAborted:
      return 409;
    default:
      return 500;
  }
}

namespace {

// Capability errors carry the "<verb> not supported: ..." wording of result
// entries.
absl::Status VerbError(const std::string& verb, const std::string& test,
                       const absl::Status& status) {
  if (!IsCapabilityError(status)) return status;
  return CapabilityError(ErrorEntry({}, verb, test, Json::object(), status).error);
}

}  // namespace

Json ErrorBody(int code, const absl::Status& status) {
  std::string message(status.message());
  if (IsCapabilityError(status)) message = message.substr(sizeof(kCapabilityPrefix) - 1);
  Json error = {{"code", code}, {"message", message}};
  if (!message.empty() && message[0] == '/') {
    const size_t colon = message.find(": ");
    if (colon != std::string::npos) error["field"] = message.substr(0, colon);
  }
  return {{"error", std::move(error)}};
}

Json OpenApiSpec() {
  Json paths = Json::object();
  paths["/api/experiment"] = PathItem("get", "Experiment overview", nullptr, {200});
  paths["/api/data/load"] = PathItem(
      "post", "Load a CSV as the experiment dataset",
      R"({"type":"object","required":["path","target","task"],"properties":{"path":{"type":"string"},"target":{"type":"string"},"task":{"enum":["regression","binary"]}}})",
      {200, 400, 409});
  paths["/api/data/prepare"] = PathItem(
      "post", "Split and impute the dataset",
      R"({"type":"object","properties":{"test_ratio":{"type":"number"},"seed":{"type":"integer"}}})",
      {200, 400, 409});
  paths["/api/data/summary"] = PathItem("get", "EDA summary", nullptr, {200, 409});
  paths["/api/data/quality"] = PathItem("get", "Data quality report", nullptr, {200, 409});
  paths["/api/models/train"] = PathItem(
      "post", "Train a model (job)",
      R"({"type":"object","required":["family"],"properties":{"family":{"enum":["glm","gam","tree","xgb1","xgb2"]},"id":{"type":"string"},"params":{"type":"object"}}})",
      {202, 400, 409});
  paths["/api/models/register"] = PathItem(
      "post", "Register a score table as a pseudo model",
      R"({"type":"object","required":["scores"],"properties":{"scores":{"type":"string"},"id":{"type":"string"}}})",
      {201, 400, 409});
  paths["/api/models"] = PathItem("get", "Model descriptions", nullptr, {200});
  paths["/api/models/{id}"] = PathItem("get", "One model description", nullptr, {200, 404});
  paths["/api/interpret"] = PathItem(
      "post", "Inherent interpretation (job)",
      R"({"type":"object","required":["model"],"properties":{"model":{"type":"string"},"test":{"enum":["global","local"]},"config":{"type":"object"}}})",
      {202, 400, 404, 422});
  paths["/api/explain"] = PathItem(
      "post", "Post-hoc explanation (job)",
      R"({"type":"object","required":["model","test"],"properties":{"model":{"type":"string"},"test":{"enum":["pfi","pdp","ale","lime","shap"]},"config":{"type":"object"}}})",
      {202, 400, 404, 422});
  paths["/api/diagnose/{test}"] = PathItem(
      "post", "Diagnostic test (job)",
      R"({"type":"object","required":["model"],"properties":{"model":{"type":"string"},"config":{"type":"object"}}})",
      {202, 400, 404, 422});
  paths["/api/compare"] = PathItem(
      "post", "Compare two or three models (job)",
      R"({"type":"object","required":["models"],"properties":{"models":{"type":"array","items":{"type":"string"},"minItems":2,"maxItems":3},"config":{"type":"object"}}})",
      {202, 400, 404});
  paths["/api/jobs/{id}"] = PathItem(
      "get", "Job status: queued|running|done|failed, with result or error", nullptr,
      {200, 404});
  paths["/api/report"] = PathItem("get", "Report bundle", nullptr, {200, 409});
  paths["/api/spec"] = PathItem("get", "This document", nullptr, {200});
  return {{"openapi", "3.0.3"},
          {"info", {{"title", "workbench"}, {"version", "1"}}},
          {"paths", std::move(paths)}};
}

Service::Service(Experiment exp, std::optional<std::string> save_path, int workers)
    : exp_(std::move(exp)), save_path_(std::move(save_path)) {
  for (int i = 0; i < std::max(1, workers); ++i) {
    workers_.emplace_back([this] { WorkerLoop(); });
  }
}

Service::~Service() {
  Stop();
  {
    std::lock_guard<std::mutex> lock(jobs_mu_);
    stopping_ = true;
  }
  jobs_cv_.notify_all();
  for (auto& t : workers_) t.join();
}

void Service::WorkerLoop() {
  for (;;) {
    std::shared_ptr<Job> job;
    {
      std::unique_lock<std::mutex> lock(jobs_mu_);
      jobs_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = queue_.front();
      queue_.pop_front();
      job->state = JobState::kRunning;
    }
    absl::StatusOr<Json> result = job->work();
    {
      std::lock_guard<std::mutex> lock(jobs_mu_);
      if (result.ok()) {
        job->state = JobState::kDone;
        job->result = std::move(*result);
      } else {
        job->state = JobState::kFailed;
        job->error_status = HttpStatusFor(result.status());
        job->error = ErrorBody(job->error_status, result.status())["error"];
      }
      job->work = nullptr;
      if (job->mutation) mutation_in_flight_ = false;
    }
    done_cv_.notify_all();
  }
}

absl::Status Service::BeginMutation() {
  std::lock_guard<std::mutex> lock(jobs_mu_);
  if (mutation_in_flight_) {
    return absl::AbortedError("another mutation is in flight; retry when it completes");
  }
  mutation_in_flight_ = true;
  return absl::OkStatus();
}

void Service::EndMutation() {
  std::lock_guard<std::mutex> lock(jobs_mu_);
  mutation_in_flight_ = false;
}

absl::Status Service::Persist() {
  if (!save_path_) return absl::OkStatus();
  return exp_.Save(*save_path_);
}

HttpResponse Service::Submit(std::string kind, bool mutation,
                             std::function<absl::StatusOr<Json>()> work) {
  auto job = std::make_shared<Job>();
  job->kind = std::move(kind);
  job->mutation = mutation;
  job->work = std::move(work);
  {
    std::lock_guard<std::mutex> lock(jobs_mu_);
    if (mutation) {
      if (mutation_in_flight_) {
        return Error(absl::AbortedError("another mutation is in flight; retry when it completes"));
      }
      mutation_in_flight_ = true;
    }
    job->id = absl::StrCat("job-", next_job_++);
    jobs_[job->id] = job;
    queue_.push_back(job);
  }
  jobs_cv_.notify_one();
  return {202, {{"job_id", job->id}, {"status", "queued"}}};
}

bool Service::WaitForJob(const std::string& job_id) {
  std::unique_lock<std::mutex> lock(jobs_mu_);
  const auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return false;
  const auto job = it->second;
  done_cv_.wait(lock, [&] {
    return job->state == JobState::kDone || job->state == JobState::kFailed;
  });
  return true;
}

HttpResponse Service::JobStatus(const std::string& id) {
  std::lock_guard<std::mutex> lock(jobs_mu_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) {
    return Error(absl::NotFoundError(absl::StrCat("unknown job '", id, "'")));
  }
  const Job& job = *it->second;
  Json out = {{"job_id", job.id}, {"kind", job.kind},
              {"status", StateName(static_cast<int>(job.state))}};
  if (job.state == JobState::kDone) out["result"] = job.result;
  if (job.state == JobState::kFailed) out["error"] = job.error;
  return {200, std::move(out)};
}

HttpResponse Service::ExperimentInfo() {
  std::shared_lock<std::shared_mutex> lock(exp_mu_);
  Json data = nullptr;
  if (exp_.has_data()) {
    const Dataset& ds = exp_.dataset();
    data = {{"source", exp_.data_source()},
            {"content_hash", exp_.content_hash()},
            {"num_rows", ds.num_rows()},
            {"target", ds.target},
            {"task", std::string(TaskKindName(ds.task))},
            {"prepared", ds.prepared},
            {"features", SchemaToJson(ds.FeatureSchema())}};
  }
  Json models = Json::array();
  for (const auto& m : exp_.models()) models.push_back(DescribeModel(*m));
  Json results = Json::array();
  for (const ResultEntry& e : exp_.results()) {
    Json r = {{"models", e.models}, {"verb", e.verb}, {"test", e.test},
              {"config_hash", e.config_hash}, {"status", e.ok ? "ok" : "error"}};
    if (!e.ok) r["error"] = e.error;
    results.push_back(std::move(r));
  }
  return {200,
          {{"schema_version", kExperimentSchemaVersion},
           {"seed", exp_.seed()},
           {"data", std::move(data)},
           {"models", std::move(models)},
           {"results", std::move(results)}}};
}

HttpResponse Service::LoadDataRequest(const Json& body) {
  if (auto s = CheckKnownKeys(body, "", {"path", "target", "task"}); !s.ok()) return Error(s);
  auto path = GetString(body, "path", "", std::nullopt);
  auto target = GetString(body, "target", "", std::nullopt);
  auto task = GetString(body, "task", "", std::nullopt);
  for (const absl::Status& s : {path.status(), target.status(), task.status()}) {
    if (!s.ok()) return Error(s);
  }
  if (!ParseTaskKind(*task).ok()) return Error(PathError("/task", "expected regression|binary"));
  if (auto s = BeginMutation(); !s.ok()) return Error(s);
  absl::Status status;
  {
    std::unique_lock<std::shared_mutex> lock(exp_mu_);
    status = LoadData(exp_, *path, *target, *task);
    if (status.ok()) status = Persist();
  }
  EndMutation();
  if (!status.ok()) return Error(status);
  return ExperimentInfo();
}

HttpResponse Service::PrepareRequest(const Json& body) {
  if (auto s = CheckKnownKeys(body, "", {"test_ratio", "seed"}); !s.ok()) return Error(s);
  auto ratio = GetDouble(body, "test_ratio", "", kDefaultTestRatio);
  if (!ratio.ok()) return Error(ratio.status());
  if (!(*ratio > 0 && *ratio < 1)) return Error(PathError("/test_ratio", "must lie in (0, 1)"));
  std::optional<uint64_t> seed;
  if (body.contains("seed")) {
    auto s = GetSeed(body, "seed", "", std::nullopt);
    if (!s.ok()) return Error(s.status());
    seed = *s;
  }
  if (auto s = BeginMutation(); !s.ok()) return Error(s);
  absl::Status status;
  {
    std::unique_lock<std::shared_mutex> lock(exp_mu_);
    status = PrepareData(exp_, *ratio, seed);
    if (status.ok()) status = Persist();
  }
  EndMutation();
  if (!status.ok()) return Error(status);
  return ExperimentInfo();
}

HttpResponse Service::TrainRequest(const Json& body) {
  if (auto s = CheckKnownKeys(body, "", {"family", "id", "params"}); !s.ok()) return Error(s);
  auto family = GetString(body, "family", "", std::nullopt);
  auto id = GetString(body, "id", "", "");
  if (!family.ok()) return Error(family.status());
  if (!id.ok()) return Error(id.status());
  auto parsed = ParseModelFamily(*family);
  if (!parsed.ok()) return Error(PathError("/family", std::string(parsed.status().message())));
  const Json params = body.contains("params") ? body["params"] : Json::object();
  if (auto s = ModelSpecFromJson(*parsed, params, "/params").status(); !s.ok()) return Error(s);
  {
    std::shared_lock<std::shared_mutex> lock(exp_mu_);
    if (!exp_.has_data() || !exp_.dataset().prepared) {
      return Error(absl::FailedPreconditionError("dataset must be loaded and prepared"));
    }
    if (!id->empty() && exp_.FindModel(*id) != nullptr) {
      return Error(absl::AlreadyExistsError(absl::StrCat("model '", *id, "' already exists")));
    }
  }
  const std::string f = *family;
  const std::string model_id = *id;
  return Submit("train", true, [this, f, params, model_id]() -> absl::StatusOr<Json> {
    std::unique_lock<std::shared_mutex> lock(exp_mu_);
    ASSIGN_OR_RETURN(const std::string trained, TrainModel(exp_, f, params, model_id));
    RETURN_IF_ERROR(Persist());
    return Json{{"model_id", trained}, {"model", DescribeModel(*exp_.FindModel(trained))}};
  });
}

HttpResponse Service::RegisterRequest(const Json& body) {
  if (auto s = CheckKnownKeys(body, "", {"scores", "id"}); !s.ok()) return Error(s);
  auto scores = GetString(body, "scores", "", std::nullopt);
  auto id = GetString(body, "id", "", "");
  if (!scores.ok()) return Error(scores.status());
  if (!id.ok()) return Error(id.status());
  if (auto s = BeginMutation(); !s.ok()) return Error(s);
  absl::StatusOr<std::string> registered;
  Json description;
  {
    std::unique_lock<std::shared_mutex> lock(exp_mu_);
    registered = RegisterModel(exp_, *scores, *id);
    if (registered.ok()) {
      description = DescribeModel(*exp_.FindModel(*registered));
      if (auto s = Persist(); !s.ok()) registered = s;
    }
  }
  EndMutation();
  if (!registered.ok()) return Error(registered.status());
  return {201, {{"model_id", *registered}, {"model", description}}};
}

HttpResponse Service::AnalysisRequest(const std::string& verb, std::string test,
                                      const Json& body) {
  const bool compare = verb == "compare";
  absl::Status keys = compare ? CheckKnownKeys(body, "", {"models", "config"})
                      : verb == "diagnose" ? CheckKnownKeys(body, "", {"model", "config"})
                                           : CheckKnownKeys(body, "", {"model", "test", "config"});
  if (!keys.ok()) return Error(keys);
  std::vector<std::string> ids;
  if (compare) {
    auto models = GetStringArray(body, "models", "", std::nullopt);
    if (!models.ok()) return Error(models.status());
    if (models->size() < 2 || models->size() > 3) {
      return Error(PathError("/models", "compare takes two or three models"));
    }
    ids = *models;
    test = "compare";
  } else {
    auto model = GetString(body, "model", "", std::nullopt);
    if (!model.ok()) return Error(model.status());
    ids = {*model};
    if (verb != "diagnose") {
      auto t = GetString(body, "test", "", verb == "interpret" ? "global" : std::optional<std::string>());
      if (!t.ok()) return Error(t.status());
      test = *t;
    }
  }
  const auto known = KnownTests(verb);
  if (std::find(known.begin(), known.end(), test) == known.end()) {
    if (verb == "diagnose") {
      return Error(absl::NotFoundError(absl::StrCat("unknown diagnose test '", test, "'")));
    }
    return Error(PathError("/test", absl::StrCat("unknown ", verb, " test '", test, "'")));
  }
  const Json config = body.contains("config") ? body["config"] : Json::object();
  if (!config.is_object()) return Error(PathError("/config", "expected an object"));
  {
    std::shared_lock<std::shared_mutex> lock(exp_mu_);
    if (!exp_.has_data() || !exp_.dataset().prepared) {
      return Error(absl::FailedPreconditionError("dataset must be loaded and prepared"));
    }
    for (const std::string& id : ids) {
      const TrainedModel* m = exp_.FindModel(id);
      if (m == nullptr) return Error(absl::NotFoundError(absl::StrCat("unknown model '", id, "'")));
      if (verb == "interpret") {
        if (auto s = CheckInterpretable(*m); !s.ok()) return Error(VerbError(verb, test, s));
      }
      if (verb == "explain" && !m->reevaluable()) {
        return Error(VerbError(verb, test, CapabilityError(absl::StrCat(
            test, " needs a model that can score new rows; '", id,
            "' is a pseudo model backed by a score table"))));
      }
    }
  }
  return Submit(verb, false, [this, ids, verb, test, config]() -> absl::StatusOr<Json> {
    absl::StatusOr<ResultEntry> entry;
    {
      std::shared_lock<std::shared_mutex> lock(exp_mu_);
      entry = exp_.Analyze(ids, verb, test, config);
    }
    if (!entry.ok()) return VerbError(verb, test, entry.status());
    {
      std::unique_lock<std::shared_mutex> lock(exp_mu_);
      exp_.AddResult(*entry);
      RETURN_IF_ERROR(Persist());
    }
    return ResultEntryToJson(*entry);
  });
}

HttpResponse Service::Route(const std::string& method, const std::string& path,
                            const Json& body) {
  const std::vector<std::string> parts = absl::StrSplit(path, '/', absl::SkipEmpty());
  if (parts.empty() || parts[0] != "api") {
    return Error(absl::NotFoundError(absl::StrCat("no route for ", path)));
  }
  const size_t n = parts.size();
  auto is = [&](std::initializer_list<const char*> expected) {
    if (expected.size() != n - 1) return false;
    size_t i = 1;
    for (const char* e : expected) {
      if (parts[i++] != e) return false;
    }
    return true;
  };
  if (method == "GET") {
    if (is({"experiment"})) return ExperimentInfo();
    if (is({"spec"})) return {200, OpenApiSpec()};
    if (is({"models"})) {
      std::shared_lock<std::shared_mutex> lock(exp_mu_);
      Json models = Json::array();
      for (const auto& m : exp_.models()) models.push_back(DescribeModel(*m));
      return {200, std::move(models)};
    }
    if (n == 3 && parts[1] == "models") {
      std::shared_lock<std::shared_mutex> lock(exp_mu_);
      const TrainedModel* m = exp_.FindModel(parts[2]);
      if (m == nullptr) {
        return Error(absl::NotFoundError(absl::StrCat("unknown model '", parts[2], "'")));
      }
      return {200, DescribeModel(*m)};
    }
    if (n == 3 && parts[1] == "jobs") return JobStatus(parts[2]);
    if (is({"data", "summary"}) || is({"data", "quality"})) {
      std::shared_lock<std::shared_mutex> lock(exp_mu_);
      if (!exp_.has_data()) return Error(absl::FailedPreconditionError("no dataset loaded"));
      if (parts[2] == "summary") return {200, ToJson(Summarize(exp_.dataset()))};
      return {200, ToJson(DataQuality(exp_.dataset()))};
    }
    if (is({"report"})) {
      std::shared_lock<std::shared_mutex> lock(exp_mu_);
      auto report = exp_.BuildReport();
      if (!report.ok()) return Error(report.status());
      return {200, std::move(*report)};
    }
  } else if (method == "POST") {
    if (!body.is_object()) return BadRequest("request body must be a JSON object");
    if (is({"data", "load"})) return LoadDataRequest(body);
    if (is({"data", "prepare"})) return PrepareRequest(body);
    if (is({"models", "train"})) return TrainRequest(body);
    if (is({"models", "register"})) return RegisterRequest(body);
    if (is({"interpret"})) return AnalysisRequest("interpret", "", body);
    if (is({"explain"})) return AnalysisRequest("explain", "", body);
    if (n == 3 && parts[1] == "diagnose") return AnalysisRequest("diagnose", parts[2], body);
    if (is({"compare"})) return AnalysisRequest("compare", "compare", body);
  } else {
    return {405, ErrorBody(405, absl::UnimplementedError("method not allowed"))};
  }
  return Error(absl::NotFoundError(absl::StrCat("no route for ", method, " ", path)));
}

HttpResponse Service::Handle(const std::string& method, const std::string& path,
                             const std::string& body) {
  Json parsed = Json::object();
  if (method == "POST" && !body.empty()) {
    try {
      parsed = Json::parse(body);
    } catch (const Json::parse_error& e) {
      return BadRequest(absl::StrCat("request body is not valid JSON: ", e.what()));
    }
  }
  return Route(method, path, parsed);
}

absl::Status Service::Serve(const std::string& host, int port,
                            const std::function<void(int)>& on_bound) {
  httplib::Server server;
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = Handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(DumpJson(r.body), "application/json");
  };
  server.Get(R"(/api/.*)", handler);
  server.Post(R"(/api/.*)", handler);
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    return absl::UnavailableError(absl::StrCat("cannot bind ", host, ":", port));
  }
  {
    std::lock_guard<std::mutex> lock(server_mu_);
    server_ = &server;
  }
  if (on_bound) on_bound(bound);
  server.listen_after_bind();
  {
    std::lock_guard<std::mutex> lock(server_mu_);
    server_ = nullptr;
  }
  return absl::OkStatus();
}

void Service::Stop() {
  std::lock_guard<std::mutex> lock(server_mu_);
  if (server_ == nullptr) return;
  auto* server = static_cast<httplib::Server*>(server_);
  server->wait_until_ready();
  server->stop();
}

}  // namespace workbench
