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

#ifndef WORKBENCH_DATASET_H_
#define WORKBENCH_DATASET_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace workbench {

enum class TaskKind { kRegression, kBinary };
enum class ColumnKind { kNumeric, kCategorical };
enum class SplitRole : uint8_t { kTrain = 0, kTest = 1 };

std::string_view TaskKindName(TaskKind task);
absl::StatusOr<TaskKind> ParseTaskKind(std::string_view name);
std::string_view ColumnKindName(ColumnKind kind);

// Level assigned to missing categorical cells by Prepare().
inline constexpr char kMissingLevel[] = "missing";

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Numeric value, or the level code for categorical columns. NaN if missing.
  std::vector<double> values;
  std::vector<uint8_t> missing;
  // Categorical levels in order of first appearance.
  std::vector<std::string> levels;

  int num_rows() const { return static_cast<int>(values.size()); }
  bool IsMissing(int row) const { return missing[row] != 0; }
};

struct FeatureInfo {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<std::string> levels;

  bool operator==(const FeatureInfo&) const = default;
};

// Ordered feature layout shared by a dataset and every model trained on it.
struct Schema {
  std::vector<FeatureInfo> features;

  int size() const { return static_cast<int>(features.size()); }
  // -1 when absent.
  int IndexOf(std::string_view name) const;
  bool operator==(const Schema&) const = default;
};

using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Model input: one row per instance in schema order. Categorical entries hold
// level codes. `row_ids` links rows back to dataset rows; it is empty for
// synthetic rows (perturbed, grid-substituted, sampled).
struct Rows {
  FeatureMatrix x;
  std::vector<int64_t> row_ids;

  int size() const { return static_cast<int>(x.rows()); }
  int num_features() const { return static_cast<int>(x.cols()); }
  std::span<const double> row(int i) const {
    return {x.row(i).data(), static_cast<size_t>(x.cols())};
  }
};

struct Dataset {
  std::string name;
  std::vector<Column> columns;
  std::string target;
  TaskKind task = TaskKind::kRegression;
  std::vector<SplitRole> split;
  // Optional non-negative per-row weights; empty means unit weights.
  std::vector<double> weights;
  bool prepared = false;

  int num_rows() const {
    return columns.empty() ? 0 : columns.front().num_rows();
  }
  int TargetIndex() const;
  // Column indices of the features, i.e. all columns except the target.
  std::vector<int> FeatureColumns() const;
  Schema FeatureSchema() const;
  std::vector<int> RowsIn(SplitRole role) const;
  std::vector<int> AllRows() const;
  Rows MakeRows(std::span<const int> rows) const;
  std::vector<double> Targets(std::span<const int> rows) const;
};

absl::Status ValidateDataset(const Dataset& ds);

// CSV ingestion. Columns whose non-empty cells all parse as numbers are
// numeric, others categorical. Empty cells are missing.
absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                std::string_view target, TaskKind task);
absl::StatusOr<Dataset> LoadCsvText(std::string_view text,
                                    std::string_view target, TaskKind task,
                                    std::string name = "data");
std::string DatasetToCsv(const Dataset& ds);
absl::Status WriteCsv(const Dataset& ds, const std::string& path);

struct NumericSummary {
  std::string column;
  int count = 0;  // non-missing
  double mean = 0, sd = 0, min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  std::vector<double> histogram_edges;  // 21 edges
  std::vector<int> histogram_counts;    // 20 bins
};

struct CategoricalSummary {
  std::string column;
  std::vector<std::pair<std::string, int>> frequencies;
  int missing = 0;
};

struct CorrelationMatrix {
  std::vector<std::string> columns;
  // Absent where a column is constant or has fewer than two paired rows.
  std::vector<std::vector<std::optional<double>>> values;
};

struct EdaSummary {
  int num_rows = 0;
  std::vector<NumericSummary> numeric;
  std::vector<CategoricalSummary> categorical;
  CorrelationMatrix pearson;
  CorrelationMatrix spearman;
  // Numeric columns without variance; their correlations are absent.
  std::vector<std::string> degenerate_columns;
  // Counts of target classes {0, 1}; binary tasks only.
  std::optional<std::array<int, 2>> class_balance;
};

inline constexpr int kHistogramBins = 20;

EdaSummary Summarize(const Dataset& ds);

struct ColumnQuality {
  std::string column;
  int missing = 0;
  bool constant = false;
  // IQR rule outliers; numeric columns only.
  std::optional<int> outliers;
};

struct DataQualityReport {
  int num_rows = 0;
  std::vector<ColumnQuality> columns;
  // Rows identical (all columns, missing treated as equal) to an earlier row.
  int duplicate_rows = 0;
};

DataQualityReport DataQuality(const Dataset& ds);

// IQR outlier count under the type-7 quantile rule.
int CountIqrOutliers(std::span<const double> values);

struct FeatureScore {
  std::string feature;
  double score = 0;
};

struct FeatureSelection {
  std::vector<FeatureScore> ranked;
  // Set when more features were requested than exist.
  bool truncated = false;
};

// Ranks features by |Pearson| with the target (numeric) or the correlation
// ratio (categorical), descending, ties kept in column order.
absl::StatusOr<FeatureSelection> FeatureSelect(const Dataset& ds, int top_k);

// Correlation ratio of a numeric response over categorical groups.
double CorrelationRatio(std::span<const int> groups,
                        std::span<const double> response);

// Seeded train/test split (stratified by class for binary tasks) followed by
// imputation: numeric cells get the train median, categorical cells the
// "missing" level.
absl::StatusOr<Dataset> Prepare(const Dataset& ds, double test_ratio,
                                uint64_t seed);

}  // namespace workbench

#endif  // WORKBENCH_DATASET_H_
