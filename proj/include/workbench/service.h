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

#ifndef WORKBENCH_SERVICE_H_
#define WORKBENCH_SERVICE_H_

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "absl/status/status.h"
#include "workbench/experiment.h"
#include "workbench/json_util.h"

namespace workbench {

struct HttpResponse {
  int status = 200;
  Json body;
};

// HTTP status for an engine error: 400 invalid argument, 404 not found,
// 409 state conflict, 422 capability violation, 500 otherwise.
int HttpStatusFor(const absl::Status& status);
// {"error": {"code", "message", "field"?}}; `field` is the JSON pointer
// prefix of path errors.
Json ErrorBody(int code, const absl::Status& status);

// OpenAPI 3 description of the service.
Json OpenApiSpec();

// JSON API over one experiment. Long-running POSTs are queued as jobs on a
// bounded worker pool and polled through /api/jobs/{id}. Reads run
// concurrently; mutations are serialized and a second mutation submitted
// while one is in flight is rejected with 409.
class Service {
 public:
  // When `save_path` is set the experiment is saved after every mutation.
  Service(Experiment exp, std::optional<std::string> save_path = std::nullopt,
          int workers = 2);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Transport-independent entry point used by the HTTP server and tests.
  HttpResponse Handle(const std::string& method, const std::string& path,
                      const std::string& body);

  // Blocks until the job leaves queued/running; false for unknown ids.
  bool WaitForJob(const std::string& job_id);

  // Serves on host:port until Stop(). Port 0 picks a free port, reported via
  // `on_bound` before serving.
  absl::Status Serve(const std::string& host, int port,
                     const std::function<void(int)>& on_bound = nullptr);
  void Stop();

 private:
  enum class JobState { kQueued, kRunning, kDone, kFailed };
  struct Job {
    std::string id;
    std::string kind;
    JobState state = JobState::kQueued;
    bool mutation = false;
    Json result;
    int error_status = 0;
    Json error;
    std::function<absl::StatusOr<Json>()> work;
  };

  HttpResponse Route(const std::string& method, const std::string& path, const Json& body);
  HttpResponse Submit(std::string kind, bool mutation,
                      std::function<absl::StatusOr<Json>()> work);
  HttpResponse JobStatus(const std::string& id);
  HttpResponse ExperimentInfo();
  HttpResponse LoadDataRequest(const Json& body);
  HttpResponse PrepareRequest(const Json& body);
  HttpResponse TrainRequest(const Json& body);
  HttpResponse RegisterRequest(const Json& body);
  HttpResponse AnalysisRequest(const std::string& verb, std::string test, const Json& body);
  absl::Status Persist();
  absl::Status BeginMutation();
  void EndMutation();
  void WorkerLoop();

  Experiment exp_;
  std::optional<std::string> save_path_;
  std::shared_mutex exp_mu_;

  std::mutex jobs_mu_;
  std::condition_variable jobs_cv_;
  std::condition_variable done_cv_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::deque<std::shared_ptr<Job>> queue_;
  uint64_t next_job_ = 1;
  bool mutation_in_flight_ = false;
  bool stopping_ = false;
  std::vector<std::thread> workers_;

  std::mutex server_mu_;
  void* server_ = nullptr;
};

}  // namespace workbench

#endif  // WORKBENCH_SERVICE_H_
