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

#ifndef WORKBENCH_EXPERIMENT_H_
#define WORKBENCH_EXPERIMENT_H_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "workbench/dataset.h"
#include "workbench/json_util.h"
#include "workbench/model.h"

namespace workbench {

inline constexpr int kExperimentSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

// Hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

// Exact, lossless dataset document (values, missing masks, levels, split).
Json DatasetToJson(const Dataset& ds);
absl::StatusOr<Dataset> DatasetFromJson(const Json& j, std::string_view path);

// Hash of the canonical dump of {verb, test, config}.
std::string ConfigHash(std::string_view verb, std::string_view test, const Json& config);

struct ResultEntry {
  std::vector<std::string> models;
  std::string verb;
  std::string test;
  Json config = Json::object();
  std::string config_hash;
  bool ok = true;
  Json result;            // ok
  std::string error;      // !ok
  std::string error_kind; // !ok: capability | invalid | execution
};

Json ResultEntryToJson(const ResultEntry& entry);
absl::StatusOr<ResultEntry> ResultEntryFromJson(const Json& j, std::string_view path);

// Error entry for a failed analysis. Capability violations read
// "<verb> not supported: <reason>".
ResultEntry ErrorEntry(std::vector<std::string> models, std::string verb,
                       std::string test, Json config, const absl::Status& status);

struct ReportOptions {
  bool include_timestamps = false;
};

// Persistent container of one dataset, its models and accumulated results.
// Results are append-only and keyed by (models, verb, test, config hash).
class Experiment {
 public:
  explicit Experiment(uint64_t seed = 0);

  uint64_t seed() const { return seed_; }
  void set_seed(uint64_t seed) { seed_ = seed; }

  bool has_data() const { return dataset_ != nullptr; }
  const Dataset& dataset() const { return *dataset_; }
  std::shared_ptr<const Dataset> dataset_ptr() const { return dataset_; }
  const Json& data_source() const { return data_source_; }
  const std::string& content_hash() const { return content_hash_; }
  // Replacing the dataset is refused once models exist.
  absl::Status SetDataset(Dataset ds, Json source);

  const std::vector<std::shared_ptr<const TrainedModel>>& models() const { return models_; }
  const TrainedModel* FindModel(std::string_view id) const;
  std::shared_ptr<const TrainedModel> FindModelPtr(std::string_view id) const;
  absl::Status AddModel(TrainedModel model);
  // Next free id of the form "<family>-<k>".
  std::string NextModelId(std::string_view family) const;

  const std::vector<ResultEntry>& results() const { return results_; }
  // Returns the index of the stored entry; an entry with an existing key is
  // not stored twice.
  int AddResult(ResultEntry entry);

  // Runs an analysis on models of this experiment without storing it.
  absl::StatusOr<ResultEntry> Analyze(const std::vector<std::string>& model_ids,
                                      std::string_view verb, std::string_view test,
                                      const Json& config) const;
  // Analyze, then store the entry (an error entry on failure). The returned
  // status is the analysis status.
  absl::StatusOr<ResultEntry> RunAnalysis(const std::vector<std::string>& model_ids,
                                          std::string_view verb, std::string_view test,
                                          const Json& config);

  const std::string& created() const { return created_; }
  const std::string& updated() const { return updated_; }

  absl::StatusOr<Json> ToJson() const;
  static absl::StatusOr<Experiment> FromJson(const Json& j);
  absl::Status Save(const std::string& path) const;
  static absl::StatusOr<Experiment> Load(const std::string& path);

  absl::StatusOr<Json> BuildReport(const ReportOptions& options = {}) const;
  absl::Status EmitReport(const std::string& path, const ReportOptions& options = {}) const;

 private:
  void Touch();

  uint64_t seed_ = 0;
  std::shared_ptr<const Dataset> dataset_;
  Json data_source_ = nullptr;
  std::string content_hash_;
  std::vector<std::shared_ptr<const TrainedModel>> models_;
  std::vector<ResultEntry> results_;
  std::string created_;
  std::string updated_;
};

// Structural validation of a report bundle, including every embedded result
// (body test name, config hash, required fields).
absl::Status ValidateReport(const Json& report);

// Pretty-printed JSON with a trailing newline; the byte format shared by the
// CLI, the service and report files.
std::string DumpJson(const Json& j);

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, std::string_view contents);

}  // namespace workbench

#endif  // WORKBENCH_EXPERIMENT_H_
