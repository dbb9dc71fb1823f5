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

#ifndef WORKBENCH_PIPELINE_H_
#define WORKBENCH_PIPELINE_H_

#include <optional>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "workbench/experiment.h"
#include "workbench/json_util.h"

namespace workbench {

inline constexpr double kDefaultTestRatio = 0.2;

// Experiment operations shared by the pipeline runner, the CLI and the
// service. Each validates its inputs before mutating `exp`.

// Loads a CSV and makes it the experiment dataset (unprepared).
absl::Status LoadData(Experiment& exp, const std::string& path, std::string_view target,
                      std::string_view task);
// Splits and imputes the experiment dataset. The seed defaults to the
// experiment seed.
absl::Status PrepareData(Experiment& exp, double test_ratio, std::optional<uint64_t> seed);
// Trains a model; `params` may be null. Returns the model id (generated when
// `id` is empty). The model seed defaults to the experiment seed.
absl::StatusOr<std::string> TrainModel(Experiment& exp, std::string_view family,
                                       const Json& params, std::string id,
                                       std::string_view path = "/params");
// Registers a score table (CSV `row_id,score`).
absl::StatusOr<std::string> RegisterModel(Experiment& exp, const std::string& scores_path,
                                          std::string id);

// Pipeline configuration:
//   {"seed": 7,
//    "data": {"path": "d.csv", "target": "y", "task": "regression"},
//    "prepare": {"test_ratio": 0.2, "seed": 7},
//    "models": [{"id": "glm", "family": "glm", "params": {...}},
//               {"id": "ext", "family": "registered", "scores": "s.csv"}],
//    "tests": [{"verb": "diagnose", "test": "accuracy", "models": ["glm"],
//               "config": {...}}],
//    "report": "report.json", "experiment": "exp.json"}
// Relative paths resolve against `base_dir`. A failing test is recorded as
// an error entry and the run continues.
absl::StatusOr<Experiment> RunPipeline(const Json& config, const std::string& base_dir);
absl::StatusOr<Experiment> RunPipelineFile(const std::string& path);

}  // namespace workbench

#endif  // WORKBENCH_PIPELINE_H_
