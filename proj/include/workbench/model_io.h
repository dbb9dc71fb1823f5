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

#ifndef WORKBENCH_MODEL_IO_H_
#define WORKBENCH_MODEL_IO_H_

#include <string_view>

#include "absl/status/statusor.h"
#include "workbench/json_util.h"
#include "workbench/model.h"

namespace workbench {

inline constexpr int kModelSchemaVersion = 1;

Json SchemaToJson(const Schema& schema);
absl::StatusOr<Schema> SchemaFromJson(const Json& j, std::string_view path);

// Hyperparameters relevant to the family, plus the seed.
Json ModelSpecToJson(const ModelSpec& spec);
// Parses and range-checks `params` (may be null) for `family`.
absl::StatusOr<ModelSpec> ModelSpecFromJson(ModelFamily family,
                                            const Json& params,
                                            std::string_view path);

// Full, schema-versioned model document. Callable registered models are not
// persistable.
absl::StatusOr<Json> ModelToJson(const TrainedModel& model);
absl::StatusOr<TrainedModel> ModelFromJson(const Json& j);

// Short description used in reports and listings.
Json DescribeModel(const TrainedModel& model);

}  // namespace workbench

#endif  // WORKBENCH_MODEL_IO_H_
