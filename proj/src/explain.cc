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

#include "workbench/explain.h"

#include <algorithm>
#include <cmath>
#include <bit>
#include <numeric>
#include <random>

#include "Eigen/Dense"
#include "absl/strings/str_cat.h"
#include "workbench/parallel.h"
#include "workbench/random.h"
#include "workbench/stats.h"
#include "workbench/status.h"

namespace workbench {
namespace {

absl::Status RequireReevaluable(const TrainedModel& model, std::string_view verb) {
  if (!model.reevaluable()) {
    return CapabilityError(absl::StrCat(
        std::string(verb), " needs a model that can score new rows; '", model.id,
        "' is a pseudo model backed by a score table"));
  }
  return absl::OkStatus();
}

absl::StatusOr<int> FeatureIndex(const TrainedModel& model,
                                 const std::string& feature) {
  const int j = model.schema.IndexOf(feature);
  if (j < 0) return absl::NotFoundError(absl::StrCat("unknown feature '", feature, "'"));
  return j;
}

absl::Status CheckSchema(const TrainedModel& model, const Dataset& ds) {
  if (!(ds.FeatureSchema() == model.schema)) {
    return absl::InvalidArgumentError("dataset schema does not match the model");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<int>> SplitRows(const Dataset& ds, SplitRole role) {
  std::vector<int> rows = ds.RowsIn(role);
  if (rows.empty()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "the ", role == SplitRole::kTest ? "test" : "train",
        " split is empty; prepare the dataset first"));
  }
  return rows;
}

double MeanOf(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Synthetic copy of `rows` with one column overwritten.
Rows Substitute(const Rows& rows, int feature, double value) {
  Rows out;
  out.x = rows.x;
  out.x.col(feature).setConstant(value);
  return out;
}

std::vector<int> GridCounts(std::span<const double> grid,
                            const Eigen::Ref<const Eigen::VectorXd>& column) {
  std::vector<int> counts(grid.size(), 0);
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    const int k = static_cast<int>(
        std::lower_bound(grid.begin(), grid.end(), column[i]) - grid.begin());
    ++counts[std::min<int>(k, static_cast<int>(grid.size()) - 1)];
  }
  return counts;
}

}  // namespace

absl::StatusOr<PfiResult> Pfi(const TrainedModel& model, const Dataset& ds,
                              const PfiOptions& options) {
  RETURN_IF_ERROR(RequireReevaluable(model, "pfi"));
  RETURN_IF_ERROR(CheckSchema(model, ds));
  if (options.repeats < 1) return absl::InvalidArgumentError("repeats must be >= 1");
  const Metric metric = options.metric.value_or(DefaultMetric(model.task));
  if (!MetricAppliesTo(metric, model.task)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "metric ", std::string(MetricName(metric)), " does not apply to this task"));
  }
  ASSIGN_OR_RETURN(const std::vector<int> test, SplitRows(ds, SplitRole::kTest));
  const Rows rows = ds.MakeRows(test);
  const std::vector<double> y = ds.Targets(test);
  ASSIGN_OR_RETURN(const std::vector<double> base_pred, Predict(model, rows));
  const std::optional<double> baseline = ComputeMetric(metric, y, base_pred);
  if (!baseline) {
    return absl::FailedPreconditionError(absl::StrCat(
        std::string(MetricName(metric)), " is undefined on the test split"));
  }

  const int d = model.schema.size();
  const int repeats = options.repeats;
  const int n = rows.size();
  std::vector<double> degradation(static_cast<size_t>(d) * repeats, 0.0);
  std::vector<absl::Status> errors(degradation.size());
  ParallelFor(d * repeats, [&](int unit) {
    const int j = unit / repeats;
    const int r = unit % repeats;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(DeriveSeed(options.seed, SeedStream::kPfi,
                       {static_cast<uint64_t>(j), static_cast<uint64_t>(r)}));
    std::shuffle(perm.begin(), perm.end(), rng);
    Rows permuted;
    permuted.x = rows.x;
    for (int i = 0; i < n; ++i) permuted.x(i, j) = rows.x(perm[i], j);
    auto pred = Predict(model, permuted);
    if (!pred.ok()) {
      errors[unit] = pred.status();
      return;
    }
    const std::optional<double> value = ComputeMetric(metric, y, *pred);
    if (!value) {
      errors[unit] = absl::FailedPreconditionError("metric undefined after permutation");
      return;
    }
    degradation[unit] = HigherIsBetter(metric) ? *baseline - *value : *value - *baseline;
  });
  for (const auto& e : errors) RETURN_IF_ERROR(e);

  PfiResult out;
  out.metric = metric;
  out.baseline = *baseline;
  out.repeats = repeats;
  out.seed = options.seed;
  for (int j = 0; j < d; ++j) {
    PfiFeature f;
    f.feature = model.schema.features[j].name;
    f.degradations.assign(degradation.begin() + j * repeats,
                          degradation.begin() + (j + 1) * repeats);
    f.mean = MeanOf(f.degradations);
    f.sd = SampleSd(f.degradations);
    out.features.push_back(std::move(f));
  }
  return out;
}

std::vector<double> QuantileGrid(std::span<const double> values, int points) {
  if (values.empty() || points < 1) return {};
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> grid;
  for (int k = 0; k < points; ++k) {
    const double p = points == 1 ? 0.5 : static_cast<double>(k) / (points - 1);
    const double q = QuantileSorted(sorted, p);
    if (grid.empty() || q > grid.back()) grid.push_back(q);
  }
  return grid;
}

absl::StatusOr<PdpCurve> Pdp(const TrainedModel& model, const Dataset& ds,
                             const std::string& feature,
                             const PdpOptions& options) {
  RETURN_IF_ERROR(RequireReevaluable(model, "pdp"));
  RETURN_IF_ERROR(CheckSchema(model, ds));
  if (options.grid < 2) return absl::InvalidArgumentError("grid must be >= 2");
  ASSIGN_OR_RETURN(const int j, FeatureIndex(model, feature));
  ASSIGN_OR_RETURN(const std::vector<int> test, SplitRows(ds, SplitRole::kTest));
  const Rows rows = ds.MakeRows(test);
  const FeatureInfo& info = model.schema.features[j];

  PdpCurve out;
  out.feature = feature;
  out.kind = info.kind;
  if (info.kind == ColumnKind::kCategorical) {
    out.levels = info.levels;
    for (size_t l = 0; l < info.levels.size(); ++l) out.grid.push_back(static_cast<double>(l));
    out.counts.assign(info.levels.size(), 0);
    for (int i = 0; i < rows.size(); ++i) ++out.counts[static_cast<int>(rows.x(i, j))];
  } else {
    const Eigen::VectorXd column = rows.x.col(j);
    out.grid = QuantileGrid(std::span<const double>(column.data(), column.size()),
                            options.grid);
    out.counts = GridCounts(out.grid, column);
  }
  out.values.assign(out.grid.size(), 0.0);
  std::vector<absl::Status> errors(out.grid.size());
  ParallelFor(static_cast<int>(out.grid.size()), [&](int g) {
    auto pred = Predict(model, Substitute(rows, j, out.grid[g]));
    if (!pred.ok()) {
      errors[g] = pred.status();
      return;
    }
    out.values[g] = MeanOf(*pred);
  });
  for (const auto& e : errors) RETURN_IF_ERROR(e);
  return out;
}

absl::StatusOr<PdpSurface> Pdp2(const TrainedModel& model, const Dataset& ds,
                                const std::string& first,
                                const std::string& second,
                                const PdpOptions& options) {
  RETURN_IF_ERROR(RequireReevaluable(model, "pdp"));
  RETURN_IF_ERROR(CheckSchema(model, ds));
  if (options.grid < 2) return absl::InvalidArgumentError("grid must be >= 2");
  ASSIGN_OR_RETURN(const int a, FeatureIndex(model, first));
  ASSIGN_OR_RETURN(const int b, FeatureIndex(model, second));
  if (a == b) return absl::InvalidArgumentError("2D pdp needs two distinct features");
  if (model.schema.features[a].kind != ColumnKind::kNumeric ||
      model.schema.features[b].kind != ColumnKind::kNumeric) {
    return absl::InvalidArgumentError("2D pdp needs numeric features");
  }
  ASSIGN_OR_RETURN(const std::vector<int> test, SplitRows(ds, SplitRole::kTest));
  const Rows rows = ds.MakeRows(test);
  const Eigen::VectorXd ca = rows.x.col(a), cb = rows.x.col(b);
  PdpSurface out;
  out.first = first;
  out.second = second;
  out.first_grid = QuantileGrid(std::span<const double>(ca.data(), ca.size()), options.grid);
  out.second_grid = QuantileGrid(std::span<const double>(cb.data(), cb.size()), options.grid);
  const int ga = static_cast<int>(out.first_grid.size());
  const int gb = static_cast<int>(out.second_grid.size());
  out.values.assign(static_cast<size_t>(ga) * gb, 0.0);
  std::vector<absl::Status> errors(out.values.size());
  ParallelFor(ga * gb, [&](int cell) {
    Rows r = Substitute(rows, a, out.first_grid[cell / gb]);
    r.x.col(b).setConstant(out.second_grid[cell % gb]);
    auto pred = Predict(model, r);
    if (!pred.ok()) {
      errors[cell] = pred.status();
      return;
    }
    out.values[cell] = MeanOf(*pred);
  });
  for (const auto& e : errors) RETURN_IF_ERROR(e);
  return out;
}

absl::StatusOr<AleCurve> Ale(const TrainedModel& model, const Dataset& ds,
                             const std::string& feature,
                             const AleOptions& options) {
  RETURN_IF_ERROR(RequireReevaluable(model, "ale"));
  RETURN_IF_ERROR(CheckSchema(model, ds));
  if (options.bins < 1) return absl::InvalidArgumentError("bins must be >= 1");
  ASSIGN_OR_RETURN(const int j, FeatureIndex(model, feature));
  if (model.schema.features[j].kind != ColumnKind::kNumeric) {
    return absl::InvalidArgumentError("ale needs a numeric feature");
  }
  ASSIGN_OR_RETURN(const std::vector<int> train, SplitRows(ds, SplitRole::kTrain));
  const Rows rows = ds.MakeRows(train);
  const int n = rows.size();
  const Eigen::VectorXd column = rows.x.col(j);

  AleCurve out;
  out.feature = feature;
  out.edges = QuantileGrid(std::span<const double>(column.data(), column.size()),
                           options.bins + 1);
  const int k = static_cast<int>(out.edges.size()) - 1;
  if (k < 1) {
    out.values = {0.0};
    return out;
  }
  std::vector<int> bin(n);
  out.counts.assign(k, 0);
  for (int i = 0; i < n; ++i) {
    const int e = static_cast<int>(
        std::lower_bound(out.edges.begin() + 1, out.edges.end(), column[i]) -
        out.edges.begin());
    bin[i] = std::clamp(e, 1, k) - 1;
    ++out.counts[bin[i]];
  }
  Rows lower, upper;
  lower.x = rows.x;
  upper.x = rows.x;
  for (int i = 0; i < n; ++i) {
    lower.x(i, j) = out.edges[bin[i]];
    upper.x(i, j) = out.edges[bin[i] + 1];
  }
  ASSIGN_OR_RETURN(const std::vector<double> f_lo, Predict(model, lower));
  ASSIGN_OR_RETURN(const std::vector<double> f_hi, Predict(model, upper));
  std::vector<double> sum(k, 0.0);
  for (int i = 0; i < n; ++i) sum[bin[i]] += f_hi[i] - f_lo[i];
  out.local_effects.assign(k, 0.0);
  for (int b = 0; b < k; ++b) {
    if (out.counts[b] > 0) out.local_effects[b] = sum[b] / out.counts[b];
  }
  std::vector<double> acc(k + 1, 0.0);
  for (int b = 0; b < k; ++b) acc[b + 1] = acc[b] + out.local_effects[b];
  out.bin_values.resize(k);
  double centre = 0.0;
  for (int b = 0; b < k; ++b) {
    out.bin_values[b] = 0.5 * (acc[b] + acc[b + 1]);
    centre += out.counts[b] * out.bin_values[b];
  }
  centre /= n;
  for (double& v : out.bin_values) v -= centre;
  out.values.resize(k + 1);
  for (int e = 0; e <= k; ++e) out.values[e] = acc[e] - centre;
  return out;
}

absl::StatusOr<LimeExplanation> Lime(const TrainedModel& model,
                                     const Dataset& ds,
                                     std::span<const double> instance,
                                     const LimeOptions& options) {
  RETURN_IF_ERROR(RequireReevaluable(model, "lime"));
  RETURN_IF_ERROR(CheckSchema(model, ds));
  const int d = model.schema.size();
  if (static_cast<int>(instance.size()) != d) {
    return absl::InvalidArgumentError("instance does not match the schema");
  }
  if (options.samples < 2) return absl::InvalidArgumentError("samples must be >= 2");
  if (options.max_features < 1) return absl::InvalidArgumentError("max_features must be >= 1");
  ASSIGN_OR_RETURN(const std::vector<int> train, SplitRows(ds, SplitRole::kTrain));
  const Rows train_rows = ds.MakeRows(train);
  const int n_train = train_rows.size();
  const int n = options.samples;

  std::vector<double> sd(d, 0.0);
  for (int j = 0; j < d; ++j) {
    if (model.schema.features[j].kind == ColumnKind::kNumeric) {
      const Eigen::VectorXd c = train_rows.x.col(j);
      sd[j] = SampleSd(std::span<const double>(c.data(), c.size()));
    }
  }
  Rng rng(DeriveSeed(options.seed, SeedStream::kLime));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n_train - 1);
  Rows sample;
  sample.x.resize(n, d);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, d);
  for (int j = 0; j < d; ++j) sample.x(0, j) = instance[j];
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      if (model.schema.features[j].kind == ColumnKind::kNumeric) {
        const double e = normal(rng);
        sample.x(i, j) = instance[j] + sd[j] * e;
        s(i, j) = sd[j] > 0 ? e : 0.0;
      } else {
        sample.x(i, j) = train_rows.x(pick(rng), j);
        s(i, j) = sample.x(i, j) != instance[j] ? 1.0 : 0.0;
      }
    }
  }
  ASSIGN_OR_RETURN(const std::vector<double> pred, Predict(model, sample));
  const Eigen::Map<const Eigen::VectorXd> y(pred.data(), n);

  LimeExplanation out;
  out.kernel_width = 0.75 * std::sqrt(static_cast<double>(d));
  out.samples = n;
  out.seed = options.seed;
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = std::exp(-s.row(i).squaredNorm() / (out.kernel_width * out.kernel_width));
  }
  w /= w.sum();

  const double y_mean = w.dot(y);
  std::vector<double> score(d, 0.0);
  for (int j = 0; j < d; ++j) {
    const double m = w.dot(s.col(j));
    const Eigen::VectorXd sc = s.col(j).array() - m;
    const Eigen::VectorXd yc = y.array() - y_mean;
    const double sxx = w.dot(sc.cwiseProduct(sc));
    const double syy = w.dot(yc.cwiseProduct(yc));
    if (sxx > 0 && syy > 0) score[j] = std::abs(w.dot(sc.cwiseProduct(yc))) / std::sqrt(sxx * syy);
  }
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] > score[b]; });
  order.resize(std::min(d, options.max_features));

  const int k = static_cast<int>(order.size());
  Eigen::MatrixXd z(n, k);
  for (int c = 0; c < k; ++c) z.col(c) = s.col(order[c]);
  const Eigen::RowVectorXd z_mean = w.transpose() * z;
  const Eigen::MatrixXd zc = z.rowwise() - z_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::MatrixXd gram = zc.transpose() * w.asDiagonal() * zc;
  gram.diagonal().array() += options.ridge;
  const Eigen::VectorXd coef = gram.ldlt().solve(zc.transpose() * w.asDiagonal() * yc);
  const double intercept = y_mean - z_mean.dot(coef);
  const Eigen::VectorXd fitted = (z * coef).array() + intercept;
  const double sse = w.dot((y - fitted).cwiseAbs2());
  const double sst = w.dot(yc.cwiseAbs2());
  out.r2 = sst > 0 ? 1.0 - sse / sst : (sse == 0 ? 1.0 : 0.0);
  out.intercept = intercept;
  for (int c = 0; c < k; ++c) {
    const int j = order[c];
    out.features.push_back(model.schema.features[j].name);
    const bool numeric = model.schema.features[j].kind == ColumnKind::kNumeric;
    out.coefficients.push_back(numeric ? (sd[j] > 0 ? coef[c] / sd[j] : 0.0) : coef[c]);
  }
  return out;
}

absl::StatusOr<std::vector<double>> ExactShapley(
    const std::function<absl::StatusOr<std::vector<double>>(const Rows&)>& f,
    std::span<const double> instance, const FeatureMatrix& background,
    double* base) {
  const int d = static_cast<int>(instance.size());
  const int nb = static_cast<int>(background.rows());
  if (background.cols() != d) return absl::InvalidArgumentError("background width mismatch");
  if (nb == 0) return absl::InvalidArgumentError("empty background");
  if (d > 20) return absl::InvalidArgumentError("too many features for exact enumeration");
  const int masks = 1 << d;
  std::vector<double> v(masks, 0.0);
  std::vector<absl::Status> errors(masks);
  ParallelFor(masks, [&](int m) {
    Rows r;
    r.x = background;
    for (int j = 0; j < d; ++j) {
      if (m & (1 << j)) r.x.col(j).setConstant(instance[j]);
    }
    auto pred = f(r);
    if (!pred.ok()) {
      errors[m] = pred.status();
      return;
    }
    v[m] = MeanOf(*pred);
  });
  for (const auto& e : errors) RETURN_IF_ERROR(e);

  // weight[s] = s! (d - s - 1)! / d!
  std::vector<double> weight(d, 0.0);
  for (int s = 0; s < d; ++s) {
    double w = 1.0 / d;
    for (int k = 1; k <= s; ++k) w *= static_cast<double>(k) / (d - k);
    weight[s] = w;
  }
  std::vector<double> phi(d, 0.0);
  for (int j = 0; j < d; ++j) {
    const int bit = 1 << j;
    double sum = 0.0;
    for (int m = 0; m < masks; ++m) {
      if (m & bit) continue;
      sum += weight[std::popcount(static_cast<unsigned>(m))] * (v[m | bit] - v[m]);
    }
    phi[j] = sum;
  }
  if (base != nullptr) *base = v[0];
  return phi;
}

absl::StatusOr<ShapExplanation> Shap(const TrainedModel& model,
                                     const Dataset& ds,
                                     std::span<const double> instance,
                                     const ShapOptions& options) {
  RETURN_IF_ERROR(RequireReevaluable(model, "shap"));
  RETURN_IF_ERROR(CheckSchema(model, ds));
  const int d = model.schema.size();
  if (static_cast<int>(instance.size()) != d) {
    return absl::InvalidArgumentError("instance does not match the schema");
  }
  ShapExplanation out;
  out.seed = options.seed;
  for (const auto& f : model.schema.features) out.features.push_back(f.name);

  FeatureMatrix background;
  if (options.background) {
    background = *options.background;
  } else {
    if (options.background_size < 1) {
      return absl::InvalidArgumentError("background_size must be >= 1");
    }
    ASSIGN_OR_RETURN(std::vector<int> train, SplitRows(ds, SplitRole::kTrain));
    if (static_cast<int>(train.size()) > options.background_size) {
      Rng rng(DeriveSeed(options.seed, SeedStream::kShapBackground));
      std::shuffle(train.begin(), train.end(), rng);
      train.resize(options.background_size);
      std::sort(train.begin(), train.end());
    }
    background = ds.MakeRows(train).x;
    out.background_rows.assign(train.begin(), train.end());
  }

  const auto f = [&](const Rows& r) { return Predict(model, r); };
  Rows single;
  single.x.resize(1, d);
  for (int j = 0; j < d; ++j) single.x(0, j) = instance[j];
  ASSIGN_OR_RETURN(const std::vector<double> fx, f(single));
  out.prediction = fx[0];

  if (d <= kExactShapMaxFeatures) {
    out.exact = true;
    out.coalitions = 1 << d;
    ASSIGN_OR_RETURN(out.values, ExactShapley(f, instance, background, &out.base));
    return out;
  }

  // Kernel SHAP: coalition sizes drawn from the Shapley kernel, then a least
  // squares fit with the efficiency constraint substituted out.
  out.exact = false;
  const int m = options.coalitions;
  if (m < d) return absl::InvalidArgumentError("coalitions must be >= feature count");
  out.coalitions = m;
  ASSIGN_OR_RETURN(const std::vector<double> bg_pred, f(Rows{background, {}}));
  out.base = MeanOf(bg_pred);
  const double delta = out.prediction - out.base;

  std::vector<double> size_weight(d - 1);
  for (int s = 1; s < d; ++s) size_weight[s - 1] = (d - 1.0) / (s * (d - s));
  Rng rng(DeriveSeed(options.seed, SeedStream::kShapCoalitions));
  std::discrete_distribution<int> size_dist(size_weight.begin(), size_weight.end());
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(m, d);
  std::vector<int> features(d);
  for (int c = 0; c < m; ++c) {
    const int s = size_dist(rng) + 1;
    std::iota(features.begin(), features.end(), 0);
    for (int k = 0; k < s; ++k) {
      std::uniform_int_distribution<int> pick(k, d - 1);
      std::swap(features[k], features[pick(rng)]);
      z(c, features[k]) = 1.0;
    }
  }
  std::vector<double> v(m, 0.0);
  std::vector<absl::Status> errors(m);
  ParallelFor(m, [&](int c) {
    Rows r;
    r.x = background;
    for (int j = 0; j < d; ++j) {
      if (z(c, j) > 0) r.x.col(j).setConstant(instance[j]);
    }
    auto pred = f(r);
    if (!pred.ok()) {
      errors[c] = pred.status();
      return;
    }
    v[c] = MeanOf(*pred);
  });
  for (const auto& e : errors) RETURN_IF_ERROR(e);

  Eigen::MatrixXd x(m, d - 1);
  Eigen::VectorXd t(m);
  for (int c = 0; c < m; ++c) {
    for (int j = 0; j < d - 1; ++j) x(c, j) = z(c, j) - z(c, d - 1);
    t[c] = v[c] - out.base - z(c, d - 1) * delta;
  }
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += 1e-12;
  const Eigen::VectorXd phi = gram.ldlt().solve(x.transpose() * t);
  out.values.assign(d, 0.0);
  double rest = delta;
  for (int j = 0; j < d - 1; ++j) {
    out.values[j] = phi[j];
    rest -= phi[j];
  }
  out.values[d - 1] = rest;
  return out;
}

}  // namespace workbench
