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

#ifndef WORKBENCH_STATUS_H_
#define WORKBENCH_STATUS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

// Status propagation helpers.

#define WB_CONCAT_INNER_(a, b) a##b
#define WB_CONCAT_(a, b) WB_CONCAT_INNER_(a, b)

#define RETURN_IF_ERROR(expr)                   \
  do {                                          \
    const absl::Status _wb_status = (expr);     \
    if (!_wb_status.ok()) return _wb_status;    \
  } while (0)

#define WB_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                              \
  if (!tmp.ok()) return tmp.status();             \
  lhs = std::move(tmp).value()

#define ASSIGN_OR_RETURN(lhs, expr) \
  WB_ASSIGN_OR_RETURN_IMPL_(WB_CONCAT_(_wb_statusor_, __LINE__), lhs, expr)

namespace workbench {

// Error categories surfaced by the CLI exit codes and the HTTP service.
// Capability violations (e.g. interpreting a registered model) are reported
// as FailedPrecondition with this prefix so that front ends can map them.
inline constexpr char kCapabilityPrefix[] = "capability: ";

inline absl::Status CapabilityError(std::string_view message) {
  return absl::FailedPreconditionError(
      std::string(kCapabilityPrefix) + std::string(message));
}

inline bool IsCapabilityError(const absl::Status& status) {
  return absl::IsFailedPrecondition(status) &&
         status.message().substr(0, sizeof(kCapabilityPrefix) - 1) ==
             kCapabilityPrefix;
}

}  // namespace workbench

#endif  // WORKBENCH_STATUS_H_
