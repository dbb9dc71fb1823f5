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

#include "workbench/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "workbench/csv.h"
#include "workbench/random.h"
#include "workbench/stats.h"
#include "workbench/status.h"

namespace workbench {

std::string_view TaskKindName(TaskKind task) {
  return task == TaskKind::kRegression ? "regression" : "binary";
}

absl::StatusOr<TaskKind> ParseTaskKind(std::string_view name) {
  if (name == "regression") return TaskKind::kRegression;
  if (name == "binary" || name == "classification") return TaskKind::kBinary;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown task '", std::string(name), "' (expected regression|binary)"));
}

std::string_view ColumnKindName(ColumnKind kind) {
  return kind == ColumnKind::kNumeric ? "numeric" : "categorical";
}

int Schema::IndexOf(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (features[i].name == name) return i;
  }
  return -1;
}

int Dataset::TargetIndex() const {
  for (int i = 0; i < static_cast<int>(columns.size()); ++i) {
    if (columns[i].name == target) return i;
  }
  return -1;
}

std::vector<int> Dataset::FeatureColumns() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(columns.size()); ++i) {
    if (columns[i].name != target) out.push_back(i);
  }
  return out;
}

Schema Dataset::FeatureSchema() const {
  Schema schema;
  for (const int c : FeatureColumns()) {
    schema.features.push_back(
        {columns[c].name, columns[c].kind, columns[c].levels});
  }
  return schema;
}

std::vector<int> Dataset::RowsIn(SplitRole role) const {
  std::vector<int> out;
  for (int i = 0; i < num_rows(); ++i) {
    if (split[i] == role) out.push_back(i);
  }
  return out;
}

std::vector<int> Dataset::AllRows() const {
  std::vector<int> out(num_rows());
  std::iota(out.begin(), out.end(), 0);
  return out;
}

Rows Dataset::MakeRows(std::span<const int> rows) const {
  const auto features = FeatureColumns();
  Rows out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(features.size()));
  out.row_ids.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < features.size(); ++j) {
      out.x(i, j) = columns[features[j]].values[rows[i]];
    }
    out.row_ids.push_back(rows[i]);
  }
  return out;
}

std::vector<double> Dataset::Targets(std::span<const int> rows) const {
  const Column& y = columns[TargetIndex()];
  std::vector<double> out;
  out.reserve(rows.size());
  for (const int r : rows) out.push_back(y.values[r]);
  return out;
}

absl::Status ValidateDataset(const Dataset& ds) {
  if (ds.columns.empty()) return absl::InvalidArgumentError("no columns");
  const int n = ds.num_rows();
  if (n < 1) return absl::InvalidArgumentError("zero data rows");
  std::set<std::string> names;
  for (const auto& c : ds.columns) {
    if (c.num_rows() != n || static_cast<int>(c.missing.size()) != n) {
      return absl::InvalidArgumentError(
          absl::StrCat("column '", c.name, "' has inconsistent row count"));
    }
    if (!names.insert(c.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate column name '", c.name, "'"));
    }
  }
  const int t = ds.TargetIndex();
  if (t < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("target '", ds.target, "' not found"));
  }
  const Column& y = ds.columns[t];
  if (y.kind != ColumnKind::kNumeric) {
    return absl::InvalidArgumentError(
        absl::StrCat("target '", y.name, "' must be numeric"));
  }
  for (int i = 0; i < n; ++i) {
    if (y.IsMissing(i)) {
      return absl::InvalidArgumentError(
          absl::StrCat("target '", y.name, "' is missing at row ", i));
    }
    if (ds.task == TaskKind::kBinary && y.values[i] != 0.0 &&
        y.values[i] != 1.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("binary target must be 0 or 1, found ", y.values[i],
                       " at row ", i));
    }
  }
  if (static_cast<int>(ds.split.size()) != n) {
    return absl::InvalidArgumentError("split does not cover every row");
  }
  if (!ds.weights.empty()) {
    if (static_cast<int>(ds.weights.size()) != n) {
      return absl::InvalidArgumentError("weights do not cover every row");
    }
    for (const double w : ds.weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        return absl::InvalidArgumentError("weights must be finite and >= 0");
      }
    }
  }
  if (ds.prepared && (ds.RowsIn(SplitRole::kTrain).empty() ||
                      ds.RowsIn(SplitRole::kTest).empty())) {
    return absl::InvalidArgumentError("empty train or test partition");
  }
  return absl::OkStatus();
}

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> ParseNumber(std::string_view cell) {
  cell = Trim(cell);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    return std::nullopt;
  }
  return value;
}

std::string FormatNumber(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace

absl::StatusOr<Dataset> LoadCsvText(std::string_view text,
                                    std::string_view target, TaskKind task,
                                    std::string name) {
  ASSIGN_OR_RETURN(const auto records, ParseCsv(text));
  if (records.empty()) return absl::InvalidArgumentError("missing header row");
  const CsvRecord& header = records.front();
  const int num_columns = static_cast<int>(header.size());
  const int n = static_cast<int>(records.size()) - 1;
  if (n < 1) return absl::InvalidArgumentError("zero data rows");
  if (std::find(header.begin(), header.end(), target) == header.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("target '", std::string(target), "' not found in header"));
  }
  for (int r = 1; r <= n; ++r) {
    if (static_cast<int>(records[r].size()) != num_columns) {
      return absl::InvalidArgumentError(
          absl::StrCat("record ", r, " has ", records[r].size(),
                       " fields, header has ", num_columns));
    }
  }

  Dataset ds;
  ds.name = std::move(name);
  ds.target = std::string(target);
  ds.task = task;
  ds.split.assign(n, SplitRole::kTrain);
  for (int c = 0; c < num_columns; ++c) {
    Column col;
    col.name = header[c];
    col.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    col.missing.assign(n, 0);
    bool numeric = true;
    for (int r = 0; r < n; ++r) {
      const std::string& cell = records[r + 1][c];
      if (cell.empty()) {
        col.missing[r] = 1;
        continue;
      }
      const auto value = ParseNumber(cell);
      if (!value) {
        numeric = false;
        break;
      }
      col.values[r] = *value;
    }
    if (!numeric) {
      col.kind = ColumnKind::kCategorical;
      std::map<std::string, int> codes;
      for (int r = 0; r < n; ++r) {
        const std::string& cell = records[r + 1][c];
        if (cell.empty()) {
          col.missing[r] = 1;
          col.values[r] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        auto [it, inserted] =
            codes.emplace(cell, static_cast<int>(col.levels.size()));
        if (inserted) col.levels.push_back(cell);
        col.values[r] = it->second;
      }
    }
    ds.columns.push_back(std::move(col));
  }
  RETURN_IF_ERROR(ValidateDataset(ds));
  return ds;
}

absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                std::string_view target, TaskKind task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) {
    name = name.substr(slash + 1);
  }
  return LoadCsvText(text, target, task, name);
}

std::string DatasetToCsv(const Dataset& ds) {
  std::vector<CsvRecord> records;
  CsvRecord header;
  for (const auto& c : ds.columns) header.push_back(c.name);
  records.push_back(std::move(header));
  for (int r = 0; r < ds.num_rows(); ++r) {
    CsvRecord record;
    for (const auto& c : ds.columns) {
      if (c.IsMissing(r)) {
        record.emplace_back();
      } else if (c.kind == ColumnKind::kNumeric) {
        record.push_back(FormatNumber(c.values[r]));
      } else {
        record.push_back(c.levels[static_cast<int>(c.values[r])]);
      }
    }
    records.push_back(std::move(record));
  }
  return FormatCsv(records);
}

absl::Status WriteCsv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out << DatasetToCsv(ds);
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("short write to ", path));
}

namespace {

std::vector<double> PresentValues(const Column& c) {
  std::vector<double> out;
  for (int r = 0; r < c.num_rows(); ++r) {
    if (!c.IsMissing(r)) out.push_back(c.values[r]);
  }
  return out;
}

NumericSummary SummarizeNumeric(const Column& c) {
  NumericSummary s;
  s.column = c.name;
  std::vector<double> v = PresentValues(c);
  s.count = static_cast<int>(v.size());
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.mean = Mean(v);
  s.sd = SampleSd(v);
  s.min = v.front();
  s.max = v.back();
  s.q1 = QuantileSorted(v, 0.25);
  s.median = QuantileSorted(v, 0.5);
  s.q3 = QuantileSorted(v, 0.75);
  s.histogram_edges.resize(kHistogramBins + 1);
  const double width = (s.max - s.min) / kHistogramBins;
  for (int k = 0; k <= kHistogramBins; ++k) {
    s.histogram_edges[k] = s.min + k * width;
  }
  s.histogram_edges.back() = s.max;
  s.histogram_counts.assign(kHistogramBins, 0);
  for (const double x : v) {
    int bin = width > 0 ? static_cast<int>((x - s.min) / width) : 0;
    bin = std::clamp(bin, 0, kHistogramBins - 1);
    ++s.histogram_counts[bin];
  }
  return s;
}

CorrelationMatrix Correlations(
    const Dataset& ds, const std::vector<int>& numeric_columns,
    std::optional<double> (*corr)(std::span<const double>,
                                  std::span<const double>)) {
  CorrelationMatrix m;
  const size_t k = numeric_columns.size();
  for (const int c : numeric_columns) m.columns.push_back(ds.columns[c].name);
  m.values.assign(k, std::vector<std::optional<double>>(k));
  for (size_t a = 0; a < k; ++a) {
    for (size_t b = a; b < k; ++b) {
      const Column& ca = ds.columns[numeric_columns[a]];
      const Column& cb = ds.columns[numeric_columns[b]];
      std::vector<double> xa, xb;
      for (int r = 0; r < ds.num_rows(); ++r) {
        if (ca.IsMissing(r) || cb.IsMissing(r)) continue;
        xa.push_back(ca.values[r]);
        xb.push_back(cb.values[r]);
      }
      std::optional<double> value = corr(xa, xb);
      if (a == b && value) value = 1.0;
      m.values[a][b] = value;
      m.values[b][a] = value;
    }
  }
  return m;
}

}  // namespace

EdaSummary Summarize(const Dataset& ds) {
  EdaSummary out;
  out.num_rows = ds.num_rows();
  std::vector<int> numeric_columns;
  for (int c = 0; c < static_cast<int>(ds.columns.size()); ++c) {
    const Column& col = ds.columns[c];
    if (col.kind == ColumnKind::kNumeric) {
      numeric_columns.push_back(c);
      out.numeric.push_back(SummarizeNumeric(col));
      const auto& s = out.numeric.back();
      if (s.count < 2 || s.min == s.max) {
        out.degenerate_columns.push_back(col.name);
      }
    } else {
      CategoricalSummary s;
      s.column = col.name;
      std::vector<int> counts(col.levels.size(), 0);
      for (int r = 0; r < col.num_rows(); ++r) {
        if (col.IsMissing(r)) {
          ++s.missing;
        } else {
          ++counts[static_cast<int>(col.values[r])];
        }
      }
      for (size_t l = 0; l < col.levels.size(); ++l) {
        s.frequencies.emplace_back(col.levels[l], counts[l]);
      }
      out.categorical.push_back(std::move(s));
    }
  }
  out.pearson = Correlations(ds, numeric_columns, &Pearson);
  out.spearman = Correlations(ds, numeric_columns, &Spearman);
  if (ds.task == TaskKind::kBinary && ds.TargetIndex() >= 0) {
    std::array<int, 2> balance{0, 0};
    for (const double y : ds.columns[ds.TargetIndex()].values) {
      ++balance[y == 1.0 ? 1 : 0];
    }
    out.class_balance = balance;
  }
  return out;
}

int CountIqrOutliers(std::span<const double> values) {
  if (values.empty()) return 0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = QuantileSorted(sorted, 0.25);
  const double q3 = QuantileSorted(sorted, 0.75);
  const double iqr = q3 - q1;
  const double lo = q1 - 1.5 * iqr;
  const double hi = q3 + 1.5 * iqr;
  return static_cast<int>(std::count_if(
      sorted.begin(), sorted.end(),
      [&](double v) { return v < lo || v > hi; }));
}

DataQualityReport DataQuality(const Dataset& ds) {
  DataQualityReport report;
  const int n = ds.num_rows();
  report.num_rows = n;
  for (const auto& c : ds.columns) {
    ColumnQuality q;
    q.column = c.name;
    std::set<double> distinct;
    for (int r = 0; r < n; ++r) {
      if (c.IsMissing(r)) {
        ++q.missing;
      } else if (distinct.size() < 2) {
        distinct.insert(c.values[r]);
      }
    }
    q.constant = distinct.size() <= 1;
    if (c.kind == ColumnKind::kNumeric) {
      q.outliers = CountIqrOutliers(PresentValues(c));
    }
    report.columns.push_back(std::move(q));
  }
  // Rows compare by (missing flag, value) per column; level codes are stable
  // within a dataset so categorical cells compare by code.
  std::set<std::vector<double>> seen;
  for (int r = 0; r < n; ++r) {
    std::vector<double> key;
    key.reserve(ds.columns.size() * 2);
    for (const auto& c : ds.columns) {
      key.push_back(c.IsMissing(r) ? 1.0 : 0.0);
      key.push_back(c.IsMissing(r) ? 0.0 : c.values[r]);
    }
    if (!seen.insert(std::move(key)).second) ++report.duplicate_rows;
  }
  return report;
}

double CorrelationRatio(std::span<const int> groups,
                        std::span<const double> response) {
  const double mean = Mean(response);
  std::map<int, std::pair<double, int>> sums;
  double total = 0.0;
  for (size_t i = 0; i < response.size(); ++i) {
    auto& [sum, count] = sums[groups[i]];
    sum += response[i];
    ++count;
    total += (response[i] - mean) * (response[i] - mean);
  }
  if (total <= 0.0) return 0.0;
  double between = 0.0;
  for (const auto& [g, sc] : sums) {
    const double gm = sc.first / sc.second;
    between += sc.second * (gm - mean) * (gm - mean);
  }
  return std::sqrt(std::clamp(between / total, 0.0, 1.0));
}

absl::StatusOr<FeatureSelection> FeatureSelect(const Dataset& ds, int top_k) {
  if (top_k < 1) return absl::InvalidArgumentError("top_k must be positive");
  const auto features = ds.FeatureColumns();
  if (features.empty()) return absl::InvalidArgumentError("no features");
  const Column& y = ds.columns[ds.TargetIndex()];
  std::vector<FeatureScore> scores;
  for (const int c : features) {
    const Column& col = ds.columns[c];
    std::vector<double> x, t;
    std::vector<int> g;
    for (int r = 0; r < ds.num_rows(); ++r) {
      if (col.IsMissing(r)) continue;
      x.push_back(col.values[r]);
      g.push_back(static_cast<int>(col.values[r]));
      t.push_back(y.values[r]);
    }
    double score = 0.0;
    if (col.kind == ColumnKind::kNumeric) {
      score = std::abs(Pearson(x, t).value_or(0.0));
    } else {
      score = CorrelationRatio(g, t);
    }
    scores.push_back({col.name, score});
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const FeatureScore& a, const FeatureScore& b) {
                     return a.score > b.score;
                   });
  FeatureSelection out;
  out.truncated = top_k > static_cast<int>(scores.size());
  scores.resize(std::min<size_t>(scores.size(), top_k));
  out.ranked = std::move(scores);
  return out;
}

absl::StatusOr<Dataset> Prepare(const Dataset& ds, double test_ratio,
                                uint64_t seed) {
  RETURN_IF_ERROR(ValidateDataset(ds));
  if (!(test_ratio > 0.0 && test_ratio < 1.0)) {
    return absl::InvalidArgumentError("test_ratio must lie in (0, 1)");
  }
  const int n = ds.num_rows();
  if (n < 5) return absl::InvalidArgumentError("prepare needs at least 5 rows");
  const int test_total = static_cast<int>(std::lround(test_ratio * n));
  if (test_total < 1 || test_total > n - 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "test_ratio ", test_ratio, " leaves an empty partition for ", n,
        " rows"));
  }

  Rng rng(DeriveSeed(seed, SeedStream::kPrepare));
  std::vector<SplitRole> split(n, SplitRole::kTrain);
  auto assign_test = [&](std::vector<int> pool, int count) {
    std::shuffle(pool.begin(), pool.end(), rng);
    for (int i = 0; i < count; ++i) split[pool[i]] = SplitRole::kTest;
  };
  if (ds.task == TaskKind::kBinary) {
    const Column& y = ds.columns[ds.TargetIndex()];
    std::vector<int> pos, neg;
    for (int r = 0; r < n; ++r) (y.values[r] == 1.0 ? pos : neg).push_back(r);
    int pos_test = static_cast<int>(std::lround(
        static_cast<double>(test_total) * pos.size() / n));
    pos_test = std::clamp(pos_test, 0, static_cast<int>(pos.size()));
    int neg_test = std::clamp(test_total - pos_test, 0,
                              static_cast<int>(neg.size()));
    pos_test = test_total - neg_test;
    assign_test(std::move(neg), neg_test);
    assign_test(std::move(pos), pos_test);
  } else {
    assign_test(ds.AllRows(), test_total);
  }

  Dataset out = ds;
  out.split = std::move(split);
  for (auto& col : out.columns) {
    if (col.name == out.target) continue;
    const bool any_missing =
        std::any_of(col.missing.begin(), col.missing.end(),
                    [](uint8_t m) { return m != 0; });
    if (!any_missing) continue;
    if (col.kind == ColumnKind::kNumeric) {
      std::vector<double> train_values;
      for (int r = 0; r < n; ++r) {
        if (!col.IsMissing(r) && out.split[r] == SplitRole::kTrain) {
          train_values.push_back(col.values[r]);
        }
      }
      const double fill =
          train_values.empty() ? 0.0 : Quantile(train_values, 0.5);
      for (int r = 0; r < n; ++r) {
        if (col.IsMissing(r)) col.values[r] = fill;
      }
    } else {
      auto it = std::find(col.levels.begin(), col.levels.end(), kMissingLevel);
      const int code = static_cast<int>(it - col.levels.begin());
      if (it == col.levels.end()) col.levels.push_back(kMissingLevel);
      for (int r = 0; r < n; ++r) {
        if (col.IsMissing(r)) col.values[r] = code;
      }
    }
    std::fill(col.missing.begin(), col.missing.end(), 0);
  }
  out.prepared = true;
  RETURN_IF_ERROR(ValidateDataset(out));
  return out;
}

}  // namespace workbench
