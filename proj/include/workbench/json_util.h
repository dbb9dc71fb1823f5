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

#ifndef WORKBENCH_JSON_UTIL_H_
#define WORKBENCH_JSON_UTIL_H_

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace workbench {

using Json = nlohmann::json;

// Typed accessors over JSON objects. Errors name the JSON pointer of the
// offending key, e.g. "/models/0/params/alpha: expected a number".

inline std::string JoinPath(std::string_view path, std::string_view key) {
  return absl::StrCat(std::string(path), "/", std::string(key));
}

inline absl::Status PathError(std::string_view path, std::string_view message) {
  return absl::InvalidArgumentError(absl::StrCat(path.empty() ? std::string("/") : std::string(path), ": ",
                                                 std::string(message)));
}

inline absl::Status CheckObject(const Json& j, std::string_view path) {
  if (!j.is_object()) return PathError(path, "expected an object");
  return absl::OkStatus();
}

inline absl::Status CheckKnownKeys(const Json& j, std::string_view path,
                                   std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) return PathError(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto k : keys) known = known || k == key;
    if (!known) return PathError(JoinPath(path, key), "unknown key");
  }
  return absl::OkStatus();
}

inline absl::StatusOr<double> GetDouble(const Json& j, std::string_view key,
                                        std::string_view path,
                                        std::optional<double> fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) {
    if (fallback) return *fallback;
    return PathError(JoinPath(path, key), "required number is missing");
  }
  if (!it->is_number()) return PathError(JoinPath(path, key), "expected a number");
  return it->get<double>();
}

inline absl::StatusOr<int64_t> GetInt(const Json& j, std::string_view key,
                                      std::string_view path,
                                      std::optional<int64_t> fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) {
    if (fallback) return *fallback;
    return PathError(JoinPath(path, key), "required integer is missing");
  }
  if (it->is_number_integer()) return it->get<int64_t>();
  if (it->is_number_float()) {
    const double v = it->get<double>();
    if (v == static_cast<double>(static_cast<int64_t>(v))) return static_cast<int64_t>(v);
  }
  return PathError(JoinPath(path, key), "expected an integer");
}

inline absl::StatusOr<uint64_t> GetSeed(const Json& j, std::string_view key,
                                        std::string_view path,
                                        std::optional<uint64_t> fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) {
    if (fallback) return *fallback;
    return PathError(JoinPath(path, key), "required seed is missing");
  }
  if (it->is_number_unsigned()) return it->get<uint64_t>();
  if (it->is_number_integer() && it->get<int64_t>() >= 0) {
    return static_cast<uint64_t>(it->get<int64_t>());
  }
  return PathError(JoinPath(path, key), "expected a non-negative integer");
}

inline absl::StatusOr<bool> GetBool(const Json& j, std::string_view key,
                                    std::string_view path,
                                    std::optional<bool> fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) {
    if (fallback) return *fallback;
    return PathError(JoinPath(path, key), "required boolean is missing");
  }
  if (!it->is_boolean()) return PathError(JoinPath(path, key), "expected a boolean");
  return it->get<bool>();
}

inline absl::StatusOr<std::string> GetString(const Json& j, std::string_view key,
                                             std::string_view path,
                                             std::optional<std::string> fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) {
    if (fallback) return *fallback;
    return PathError(JoinPath(path, key), "required string is missing");
  }
  if (!it->is_string()) return PathError(JoinPath(path, key), "expected a string");
  return it->get<std::string>();
}

inline absl::StatusOr<std::vector<double>> GetDoubleArray(
    const Json& j, std::string_view key, std::string_view path,
    std::optional<std::vector<double>> fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) {
    if (fallback) return *fallback;
    return PathError(JoinPath(path, key), "required array is missing");
  }
  if (!it->is_array()) return PathError(JoinPath(path, key), "expected an array");
  std::vector<double> out;
  for (size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_number()) {
      return PathError(absl::StrCat(JoinPath(path, key), "/", i), "expected a number");
    }
    out.push_back((*it)[i].get<double>());
  }
  return out;
}

inline absl::StatusOr<std::vector<std::string>> GetStringArray(
    const Json& j, std::string_view key, std::string_view path,
    std::optional<std::vector<std::string>> fallback) {
  const auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) {
    if (fallback) return *fallback;
    return PathError(JoinPath(path, key), "required array is missing");
  }
  if (it->is_string()) return std::vector<std::string>{it->get<std::string>()};
  if (!it->is_array()) return PathError(JoinPath(path, key), "expected an array");
  std::vector<std::string> out;
  for (size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_string()) {
      return PathError(absl::StrCat(JoinPath(path, key), "/", i), "expected a string");
    }
    out.push_back((*it)[i].get<std::string>());
  }
  return out;
}

// Optional value as JSON (null when absent).
inline Json OptionalJson(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace workbench

#endif  // WORKBENCH_JSON_UTIL_H_
