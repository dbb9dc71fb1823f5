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

#ifndef WORKBENCH_ANALYSIS_H_
#define WORKBENCH_ANALYSIS_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "workbench/dataset.h"
#include "workbench/json_util.h"
#include "workbench/model.h"

namespace workbench {

// The four analysis verbs and the tests (or methods) each accepts.
//   interpret: global, local
//   explain:   pfi, pdp, ale, lime, shap
//   diagnose:  accuracy, weakspot, overfit, reliability, robustness,
//              resilience, fairness
//   compare:   compare
std::vector<std::string> KnownTests(std::string_view verb);
bool IsKnownVerb(std::string_view verb);

struct AnalysisOutput {
  Json config;  // normalized: every option with its effective value
  Json result;
};

// Validates `config` (errors name the offending key under `path`), runs the
// analysis and returns the normalized config with the result body. Seeds
// default to `default_seed`.
absl::StatusOr<AnalysisOutput> RunAnalysisOn(
    const Dataset& ds, std::span<const TrainedModel* const> models,
    std::string_view verb, std::string_view test, const Json& config,
    uint64_t default_seed, std::string_view path = "/config");

}  // namespace workbench

#endif  // WORKBENCH_ANALYSIS_H_
