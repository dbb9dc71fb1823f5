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

#ifndef WORKBENCH_CSV_H_
#define WORKBENCH_CSV_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace workbench {

using CsvRecord = std::vector<std::string>;

// Parses RFC-4180 text: comma separated, optional double-quote quoting with
// "" escapes, LF or CRLF record terminators. A trailing newline does not
// produce an empty record. A leading UTF-8 byte order mark is skipped.
absl::StatusOr<std::vector<CsvRecord>> ParseCsv(std::string_view text);

absl::StatusOr<std::vector<CsvRecord>> ReadCsvFile(const std::string& path);

// Serializes records, quoting only fields that need it. Records end in CRLF.
std::string FormatCsv(const std::vector<CsvRecord>& records);

}  // namespace workbench

#endif  // WORKBENCH_CSV_H_
