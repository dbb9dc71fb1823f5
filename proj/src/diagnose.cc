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

#include "workbench/diagnose.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "workbench/parallel.h"
#include "workbench/random.h"
#include "workbench/stats.h"
#include "workbench/status.h"

namespace workbench {
namespace {

struct SplitData {
  std::vector<int> index;
  Rows rows;
  std::vector<double> y;
  std::vector<double> score;
};

absl::StatusOr<SplitData> EvaluateSplit(const TrainedModel& model,
                                        const Dataset& ds, SplitRole role) {
  if (!(ds.FeatureSchema() == model.schema)) {
    return absl::InvalidArgumentError("dataset schema does not match the model");
  }
  SplitData out;
  out.index = ds.RowsIn(role);
  if (out.index.empty()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "the ", role == SplitRole::kTest ? "test" : "train",
        " split is empty; prepare the dataset first"));
  }
  out.rows = ds.MakeRows(out.index);
  out.y = ds.Targets(out.index);
  ASSIGN_OR_RETURN(out.score, Predict(model, out.rows));
  return out;
}

double MeanLoss(TaskKind task, std::span<const double> y,
                std::span<const double> score) {
  double sum = 0.0;
  for (size_t i = 0; i < y.size(); ++i) sum += RowLoss(task, y[i], score[i]);
  return y.empty() ? 0.0 : sum / static_cast<double>(y.size());
}

absl::StatusOr<double> RequireMetric(Metric metric, std::span<const double> y,
                                     std::span<const double> score) {
  const std::optional<double> v = ComputeMetric(metric, y, score);
  if (!v) {
    return absl::FailedPreconditionError(absl::StrCat(
        std::string(MetricName(metric)), " is undefined on the evaluated rows"));
  }
  return *v;
}

absl::StatusOr<Metric> ResolveMetric(std::optional<Metric> metric, TaskKind task) {
  const Metric m = metric.value_or(DefaultMetric(task));
  if (!MetricAppliesTo(m, task)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "metric ", std::string(MetricName(m)), " does not apply to this task"));
  }
  return m;
}

std::string Num(double v) { return absl::StrFormat("%.6g", v); }

absl::StatusOr<std::vector<SliceAxis>> MakeAxes(const TrainedModel& model,
                                                const SliceSpec& spec,
                                                const Rows& rows) {
  if (spec.features.empty() || spec.features.size() > 2) {
    return absl::InvalidArgumentError("slicing needs one or two features");
  }
  if (spec.features.size() == 2 && spec.features[0] == spec.features[1]) {
    return absl::InvalidArgumentError("2D slicing needs two distinct features");
  }
  if (spec.bins < 1 || spec.bins > 1000) {
    return absl::InvalidArgumentError("bins must lie in [1, 1000]");
  }
  if (spec.min_samples && *spec.min_samples < 1) {
    return absl::InvalidArgumentError("min_samples must be >= 1");
  }
  std::vector<SliceAxis> axes;
  for (const auto& name : spec.features) {
    const int j = model.schema.IndexOf(name);
    if (j < 0) return absl::NotFoundError(absl::StrCat("unknown feature '", name, "'"));
    const Eigen::VectorXd column = rows.x.col(j);
    axes.push_back(MakeSliceAxis(model.schema.features[j], j,
                                 std::span<const double>(column.data(), column.size()),
                                 spec.binning, spec.bins));
  }
  return axes;
}

int NumCells(const std::vector<SliceAxis>& axes) {
  int cells = 1;
  for (const auto& a : axes) cells *= a.num_bins();
  return cells;
}

int CellOf(const std::vector<SliceAxis>& axes, std::span<const double> row) {
  int cell = 0;
  for (const auto& a : axes) cell = cell * a.num_bins() + a.Bin(row[a.feature_index]);
  return cell;
}

std::vector<int> CellBins(const std::vector<SliceAxis>& axes, int cell) {
  std::vector<int> bins(axes.size());
  for (int k = static_cast<int>(axes.size()) - 1; k >= 0; --k) {
    bins[k] = cell % axes[k].num_bins();
    cell /= axes[k].num_bins();
  }
  return bins;
}

std::vector<std::string> CellLabels(const std::vector<SliceAxis>& axes,
                                    const std::vector<int>& bins) {
  std::vector<std::string> labels;
  for (size_t k = 0; k < axes.size(); ++k) labels.push_back(axes[k].Label(bins[k]));
  return labels;
}

struct CellSums {
  std::vector<int> n;
  std::vector<double> loss;
};

CellSums SumByCell(const std::vector<SliceAxis>& axes, const SplitData& data,
                   TaskKind task) {
  CellSums out;
  const int cells = NumCells(axes);
  out.n.assign(cells, 0);
  out.loss.assign(cells, 0.0);
  for (int i = 0; i < data.rows.size(); ++i) {
    const int c = CellOf(axes, data.rows.row(i));
    ++out.n[c];
    out.loss[c] += RowLoss(task, data.y[i], data.score[i]);
  }
  return out;
}

std::pair<double, double> BinRange(const SliceAxis& axis, int bin) {
  const int m = static_cast<int>(axis.cuts.size());
  return {bin == 0 ? axis.lo : axis.cuts[bin - 1], bin == m ? axis.hi : axis.cuts[bin]};
}

}  // namespace

absl::StatusOr<AccuracyResult> Accuracy(const TrainedModel& model,
                                        const Dataset& ds, double threshold) {
  ASSIGN_OR_RETURN(const SplitData train, EvaluateSplit(model, ds, SplitRole::kTrain));
  ASSIGN_OR_RETURN(const SplitData test, EvaluateSplit(model, ds, SplitRole::kTest));
  return AccuracyResult{ComputeMetricSet(model.task, train.y, train.score, threshold),
                        ComputeMetricSet(model.task, test.y, test.score, threshold)};
}

std::string_view SliceBinningName(SliceBinning binning) {
  return binning == SliceBinning::kUniform ? "uniform" : "quantile";
}

absl::StatusOr<SliceBinning> ParseSliceBinning(std::string_view name) {
  const std::string lower = absl::AsciiStrToLower(std::string(name));
  if (lower == "uniform") return SliceBinning::kUniform;
  if (lower == "quantile") return SliceBinning::kQuantile;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown binning '", std::string(name), "' (expected uniform|quantile)"));
}

int DefaultMinSamples(int num_rows) {
  return std::max(20, static_cast<int>(std::ceil(0.01 * num_rows)));
}

int SliceAxis::num_bins() const {
  return kind == ColumnKind::kCategorical ? std::max<int>(1, levels.size())
                                          : static_cast<int>(cuts.size()) + 1;
}

int SliceAxis::Bin(double value) const {
  if (kind == ColumnKind::kCategorical) {
    return std::clamp(static_cast<int>(value), 0, num_bins() - 1);
  }
  return BinIndex(cuts, value);
}

std::string SliceAxis::Label(int bin) const {
  if (kind == ColumnKind::kCategorical) return levels.empty() ? "" : levels[bin];
  const auto [a, b] = BinRange(*this, bin);
  return absl::StrCat(bin == 0 ? "[" : "(", Num(a), ", ", Num(b), "]");
}

SliceAxis MakeSliceAxis(const FeatureInfo& info, int feature_index,
                        std::span<const double> values, SliceBinning binning,
                        int bins) {
  SliceAxis axis;
  axis.feature = info.name;
  axis.feature_index = feature_index;
  axis.kind = info.kind;
  if (info.kind == ColumnKind::kCategorical) {
    axis.levels = info.levels;
    return axis;
  }
  if (values.empty()) return axis;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  axis.lo = *lo;
  axis.hi = *hi;
  if (!(axis.hi > axis.lo) || bins < 2) return axis;
  if (binning == SliceBinning::kQuantile) {
    axis.cuts = QuantileCuts(values, bins);
  } else {
    for (int k = 1; k < bins; ++k) {
      const double c = axis.lo + (axis.hi - axis.lo) * k / bins;
      if (c > axis.lo && c < axis.hi && (axis.cuts.empty() || c > axis.cuts.back())) {
        axis.cuts.push_back(c);
      }
    }
  }
  return axis;
}

absl::StatusOr<WeakspotResult> Weakspot(const TrainedModel& model,
                                        const Dataset& ds,
                                        const SliceSpec& spec, double ratio) {
  if (!(ratio > 0) || !std::isfinite(ratio)) {
    return absl::InvalidArgumentError("threshold ratio must be a positive number");
  }
  ASSIGN_OR_RETURN(const SplitData test, EvaluateSplit(model, ds, SplitRole::kTest));
  WeakspotResult out;
  out.spec = spec;
  out.metric = DefaultLoss(model.task);
  out.ratio = ratio;
  ASSIGN_OR_RETURN(out.axes, MakeAxes(model, spec, test.rows));
  out.min_samples = spec.min_samples.value_or(DefaultMinSamples(test.rows.size()));
  out.overall = MeanLoss(model.task, test.y, test.score);

  const CellSums sums = SumByCell(out.axes, test, model.task);
  for (int c = 0; c < NumCells(out.axes); ++c) {
    SliceCell cell;
    cell.bins = CellBins(out.axes, c);
    cell.labels = CellLabels(out.axes, cell.bins);
    cell.n = sums.n[c];
    cell.metric = cell.n > 0 ? sums.loss[c] / cell.n : 0.0;
    cell.weak = cell.n >= out.min_samples && cell.metric > 0 &&
                cell.metric >= ratio * out.overall;
    out.slices.push_back(std::move(cell));
  }

  if (out.axes.size() == 1) {
    const SliceAxis& axis = out.axes[0];
    const bool mergeable = axis.kind == ColumnKind::kNumeric;
    for (int b = 0; b < axis.num_bins();) {
      if (!out.slices[b].weak) {
        ++b;
        continue;
      }
      int e = b;
      while (mergeable && e + 1 < axis.num_bins() && out.slices[e + 1].weak) ++e;
      WeakRegion region;
      region.feature = axis.feature;
      region.first_bin = b;
      region.last_bin = e;
      double loss = 0.0;
      for (int k = b; k <= e; ++k) {
        region.n += sums.n[k];
        loss += sums.loss[k];
      }
      region.metric = loss / region.n;
      if (mergeable) {
        region.lo = BinRange(axis, b).first;
        region.hi = BinRange(axis, e).second;
      } else {
        region.lo = region.hi = b;
      }
      out.regions.push_back(std::move(region));
      b = e + 1;
    }
  }
  return out;
}

absl::StatusOr<OverfitResult> OverfitUnderfit(const TrainedModel& model,
                                              const Dataset& ds,
                                              const SliceSpec& spec,
                                              std::optional<double> delta) {
  if (delta && !(*delta >= 0)) return absl::InvalidArgumentError("delta must be >= 0");
  ASSIGN_OR_RETURN(const SplitData train, EvaluateSplit(model, ds, SplitRole::kTrain));
  ASSIGN_OR_RETURN(const SplitData test, EvaluateSplit(model, ds, SplitRole::kTest));
  OverfitResult out;
  out.spec = spec;
  out.metric = DefaultLoss(model.task);
  ASSIGN_OR_RETURN(out.axes, MakeAxes(model, spec, train.rows));
  out.min_samples_train = spec.min_samples.value_or(DefaultMinSamples(train.rows.size()));
  out.min_samples_test = spec.min_samples.value_or(DefaultMinSamples(test.rows.size()));
  out.overall_train = MeanLoss(model.task, train.y, train.score);
  out.overall_test = MeanLoss(model.task, test.y, test.score);
  out.delta = delta.value_or(std::max(0.5 * out.overall_train, 1e-12));

  const CellSums tr = SumByCell(out.axes, train, model.task);
  const CellSums te = SumByCell(out.axes, test, model.task);
  for (int c = 0; c < NumCells(out.axes); ++c) {
    OverfitCell cell;
    cell.bins = CellBins(out.axes, c);
    cell.labels = CellLabels(out.axes, cell.bins);
    cell.n_train = tr.n[c];
    cell.n_test = te.n[c];
    cell.skipped = cell.n_train < out.min_samples_train || cell.n_test < out.min_samples_test;
    if (!cell.skipped) {
      cell.train_metric = tr.loss[c] / cell.n_train;
      cell.test_metric = te.loss[c] / cell.n_test;
      cell.gap = cell.test_metric - cell.train_metric;
      cell.overfit = cell.gap >= out.delta;
      cell.underfit = cell.gap <= -out.delta;
    }
    out.slices.push_back(std::move(cell));
  }
  return out;
}

absl::StatusOr<int> ConformalRank(int calibration_size, double alpha) {
  if (!(alpha > 0 && alpha < 1)) return absl::InvalidArgumentError("alpha must lie in (0, 1)");
  const double exact = (calibration_size + 1.0) * (1.0 - alpha);
  const int rank = std::max(1, static_cast<int>(std::ceil(exact - 1e-9)));
  if (rank > calibration_size) {
    return absl::FailedPreconditionError(absl::StrCat(
        "calibration set of ", calibration_size, " rows is too small for alpha ",
        alpha, ": the conformal quantile needs rank ", rank));
  }
  return rank;
}

absl::StatusOr<ReliabilityResult> Reliability(const TrainedModel& model,
                                              const Dataset& ds,
                                              const ReliabilityOptions& options) {
  if (!(options.calibration_ratio > 0 && options.calibration_ratio < 1)) {
    return absl::InvalidArgumentError("calibration_ratio must lie in (0, 1)");
  }
  if (!(options.alpha > 0 && options.alpha < 1)) {
    return absl::InvalidArgumentError("alpha must lie in (0, 1)");
  }
  ASSIGN_OR_RETURN(const SplitData test, EvaluateSplit(model, ds, SplitRole::kTest));
  std::vector<int> train = ds.RowsIn(SplitRole::kTrain);
  Rng rng(DeriveSeed(options.seed, SeedStream::kReliability));
  std::shuffle(train.begin(), train.end(), rng);
  const int n_cal = static_cast<int>(std::lround(options.calibration_ratio * train.size()));
  train.resize(n_cal);
  std::sort(train.begin(), train.end());

  ReliabilityResult out;
  out.task = model.task;
  out.alpha = options.alpha;
  out.calibration_ratio = options.calibration_ratio;
  out.seed = options.seed;
  out.calibration_size = n_cal;
  out.test_size = test.rows.size();
  ASSIGN_OR_RETURN(out.rank, ConformalRank(n_cal, options.alpha));
  const Rows cal_rows = ds.MakeRows(train);
  const std::vector<double> cal_y = ds.Targets(train);
  ASSIGN_OR_RETURN(const std::vector<double> cal_score, Predict(model, cal_rows));

  const bool binary = model.task == TaskKind::kBinary;
  auto nonconformity = [&](double y, double s) {
    return binary ? 1.0 - (y > 0.5 ? s : 1.0 - s) : std::abs(y - s);
  };
  std::vector<double> scores(n_cal);
  for (int i = 0; i < n_cal; ++i) scores[i] = nonconformity(cal_y[i], cal_score[i]);
  std::sort(scores.begin(), scores.end());
  out.q_hat = scores[out.rank - 1];
  out.recipe = binary
      ? "prediction set {c : 1 - p(c) <= q_hat}; q_hat = the ceil((n_cal + 1)(1 - alpha))-th smallest of 1 - p(true class) on the calibration rows"
      : "interval y_hat +/- q_hat; q_hat = the ceil((n_cal + 1)(1 - alpha))-th smallest |y - y_hat| on the calibration rows";

  const int n = test.rows.size();
  std::vector<uint8_t> covered(n, 0);
  std::vector<double> size(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double s = test.score[i];
    if (binary) {
      const bool has1 = 1.0 - s <= out.q_hat;
      const bool has0 = s <= out.q_hat;
      size[i] = static_cast<double>(has0) + static_cast<double>(has1);
      covered[i] = test.y[i] > 0.5 ? has1 : has0;
    } else {
      size[i] = 2.0 * out.q_hat;
      covered[i] = std::abs(test.y[i] - s) <= out.q_hat;
    }
  }
  double cov = 0.0, total = 0.0;
  for (int i = 0; i < n; ++i) {
    cov += covered[i];
    total += size[i];
  }
  out.coverage = cov / n;
  (binary ? out.mean_set_size : out.mean_width) = total / n;

  if (options.slice) {
    ASSIGN_OR_RETURN(const std::vector<SliceAxis> axes,
                     MakeAxes(model, *options.slice, test.rows));
    const int cells = NumCells(axes);
    std::vector<int> count(cells, 0);
    std::vector<double> c_cov(cells, 0.0), c_size(cells, 0.0);
    for (int i = 0; i < n; ++i) {
      const int c = CellOf(axes, test.rows.row(i));
      ++count[c];
      c_cov[c] += covered[i];
      c_size[c] += size[i];
    }
    for (int c = 0; c < cells; ++c) {
      ReliabilitySlice s;
      const auto labels = CellLabels(axes, CellBins(axes, c));
      s.label = labels.size() == 1 ? labels[0] : absl::StrCat(labels[0], " x ", labels[1]);
      s.n = count[c];
      if (s.n > 0) {
        s.coverage = c_cov[c] / s.n;
        s.mean_width = c_size[c] / s.n;
      }
      out.slices.push_back(std::move(s));
    }
  }
  return out;
}

absl::StatusOr<RobustnessResult> Robustness(const TrainedModel& model,
                                            const Dataset& ds,
                                            const RobustnessOptions& options) {
  if (!model.reevaluable()) {
    return CapabilityError(absl::StrCat(
        "robustness needs a model that can score perturbed rows; '", model.id,
        "' is a pseudo model backed by a score table"));
  }
  if (options.repeats < 1) return absl::InvalidArgumentError("repeats must be >= 1");
  if (options.scales.empty()) return absl::InvalidArgumentError("empty perturbation grid");
  for (const double s : options.scales) {
    if (!(s >= 0) || !std::isfinite(s)) {
      return absl::InvalidArgumentError("perturbation scales must be finite and >= 0");
    }
  }
  ASSIGN_OR_RETURN(const Metric metric, ResolveMetric(options.metric, model.task));
  std::vector<int> features;
  if (options.features.empty()) {
    for (int j = 0; j < model.schema.size(); ++j) {
      if (model.schema.features[j].kind == ColumnKind::kNumeric) features.push_back(j);
    }
  } else {
    for (const auto& name : options.features) {
      const int j = model.schema.IndexOf(name);
      if (j < 0) return absl::NotFoundError(absl::StrCat("unknown feature '", name, "'"));
      if (model.schema.features[j].kind != ColumnKind::kNumeric) {
        return absl::InvalidArgumentError(absl::StrCat("feature '", name, "' is not numeric"));
      }
      features.push_back(j);
    }
  }
  if (features.empty()) return absl::InvalidArgumentError("no numeric features to perturb");

  ASSIGN_OR_RETURN(const SplitData test, EvaluateSplit(model, ds, SplitRole::kTest));
  const Rows train = ds.MakeRows(ds.RowsIn(SplitRole::kTrain));
  std::vector<double> sd(features.size());
  for (size_t k = 0; k < features.size(); ++k) {
    const Eigen::VectorXd c = train.x.col(features[k]);
    sd[k] = SampleSd(std::span<const double>(c.data(), c.size()));
  }
  ASSIGN_OR_RETURN(const double baseline, RequireMetric(metric, test.y, test.score));

  RobustnessResult out;
  out.metric = metric;
  out.baseline = baseline;
  out.repeats = options.repeats;
  out.seed = options.seed;
  for (const int j : features) out.features.push_back(model.schema.features[j].name);

  const int num_scales = static_cast<int>(options.scales.size());
  const int repeats = options.repeats;
  std::vector<double> values(static_cast<size_t>(num_scales) * repeats, baseline);
  std::vector<absl::Status> errors(values.size());
  ParallelFor(num_scales * repeats, [&](int unit) {
    const int s = unit / repeats;
    const int r = unit % repeats;
    const double scale = options.scales[s];
    if (scale == 0.0) return;
    Rng rng(DeriveSeed(options.seed, SeedStream::kRobustness,
                       {static_cast<uint64_t>(s), static_cast<uint64_t>(r)}));
    std::normal_distribution<double> normal(0.0, 1.0);
    Rows noisy;
    noisy.x = test.rows.x;
    for (int i = 0; i < noisy.size(); ++i) {
      for (size_t k = 0; k < features.size(); ++k) {
        noisy.x(i, features[k]) += scale * sd[k] * normal(rng);
      }
    }
    auto pred = Predict(model, noisy);
    if (!pred.ok()) {
      errors[unit] = pred.status();
      return;
    }
    auto v = RequireMetric(metric, test.y, *pred);
    if (!v.ok()) {
      errors[unit] = v.status();
      return;
    }
    values[unit] = *v;
  });
  for (const auto& e : errors) RETURN_IF_ERROR(e);
  for (int s = 0; s < num_scales; ++s) {
    RobustnessPoint p;
    p.scale = options.scales[s];
    p.values.assign(values.begin() + s * repeats, values.begin() + (s + 1) * repeats);
    double sum = 0.0;
    for (const double v : p.values) sum += v;
    p.mean = sum / repeats;
    p.sd = SampleSd(p.values);
    out.points.push_back(std::move(p));
  }
  return out;
}

std::string_view ResilienceScenarioName(ResilienceScenario scenario) {
  switch (scenario) {
    case ResilienceScenario::kWorstSample:
      return "worst-sample";
    case ResilienceScenario::kWorstCluster:
      return "worst-cluster";
    case ResilienceScenario::kOuterSample:
      return "outer-sample";
  }
  return "worst-sample";
}

absl::StatusOr<ResilienceScenario> ParseResilienceScenario(std::string_view name) {
  std::string s = absl::AsciiStrToLower(std::string(name));
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "worst-sample") return ResilienceScenario::kWorstSample;
  if (s == "worst-cluster") return ResilienceScenario::kWorstCluster;
  if (s == "outer-sample") return ResilienceScenario::kOuterSample;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown scenario '", std::string(name),
      "' (expected worst-sample|worst-cluster|outer-sample)"));
}

std::vector<ResiliencePoint> RetainedCurve(Metric metric,
                                           std::span<const double> y,
                                           std::span<const double> score,
                                           std::span<const int> order,
                                           std::span<const double> ratios) {
  std::vector<ResiliencePoint> out;
  const int n = static_cast<int>(order.size());
  for (const double ratio : ratios) {
    ResiliencePoint p;
    p.ratio = ratio;
    p.n = std::clamp(static_cast<int>(std::ceil(ratio * n - 1e-9)), 1, n);
    std::vector<double> ys(p.n), ss(p.n);
    for (int k = 0; k < p.n; ++k) {
      ys[k] = y[order[k]];
      ss[k] = score[order[k]];
    }
    p.metric = ComputeMetric(metric, ys, ss);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<int> WorstSampleOrder(TaskKind task, std::span<const double> y,
                                  std::span<const double> score) {
  const int n = static_cast<int>(y.size());
  std::vector<double> loss(n);
  for (int i = 0; i < n; ++i) loss[i] = RowLoss(task, y[i], score[i]);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return loss[a] > loss[b]; });
  return order;
}

double Psi(std::span<const double> sample, std::span<const double> reference,
           int bins) {
  const std::vector<double> cuts = QuantileCuts(reference, bins);
  const int k = static_cast<int>(cuts.size()) + 1;
  std::vector<double> p(k, 0.0), q(k, 0.0);
  for (const double v : sample) p[BinIndex(cuts, v)] += 1.0;
  for (const double v : reference) q[BinIndex(cuts, v)] += 1.0;
  double psi = 0.0;
  for (int b = 0; b < k; ++b) {
    const double ps = std::max(p[b] / sample.size(), 1e-6);
    const double qs = std::max(q[b] / reference.size(), 1e-6);
    psi += (ps - qs) * std::log(ps / qs);
  }
  return psi;
}

KMeansResult KMeans(const Eigen::MatrixXd& points, int k, int restarts,
                    uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  k = std::clamp(k, 1, std::max(1, n));
  restarts = std::max(1, restarts);
  std::vector<KMeansResult> runs(restarts);
  ParallelFor(restarts, [&](int r) {
    Rng rng(DeriveSeed(seed, SeedStream::kKMeans, {static_cast<uint64_t>(r)}));
    Eigen::MatrixXd centers(k, points.cols());
    std::uniform_int_distribution<int> first(0, n - 1);
    centers.row(0) = points.row(first(rng));
    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int e = 0; e < c; ++e) best = std::min(best, (points.row(i) - centers.row(e)).squaredNorm());
        d2[i] = best;
        total += best;
      }
      int pick = 0;
      if (total > 0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng), acc = 0.0;
        pick = n - 1;
        for (int i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc >= target && d2[i] > 0) {
            pick = i;
            break;
          }
        }
      }
      centers.row(c) = points.row(pick);
    }
    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double d = (points.row(i) - centers.row(c)).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        if (assign[i] != best) {
          assign[i] = best;
          changed = true;
        }
      }
      if (!changed) break;
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, points.cols());
      std::vector<int> count(k, 0);
      for (int i = 0; i < n; ++i) {
        sum.row(assign[i]) += points.row(i);
        ++count[assign[i]];
      }
      for (int c = 0; c < k; ++c) {
        if (count[c] > 0) centers.row(c) = sum.row(c) / count[c];
      }
    }
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) inertia += (points.row(i) - centers.row(assign[i])).squaredNorm();
    runs[r] = {std::move(assign), std::move(centers), inertia};
  });
  int best = 0;
  for (int r = 1; r < restarts; ++r) {
    if (runs[r].inertia < runs[best].inertia) best = r;
  }
  return std::move(runs[best]);
}

absl::StatusOr<ResilienceResult> Resilience(const TrainedModel& model,
                                            const Dataset& ds,
                                            const ResilienceOptions& options) {
  ASSIGN_OR_RETURN(const Metric metric, ResolveMetric(options.metric, model.task));
  for (const double r : options.ratios) {
    if (!(r > 0 && r <= 1)) return absl::InvalidArgumentError("ratios must lie in (0, 1]");
  }
  if (!(options.psi_ratio > 0 && options.psi_ratio <= 1)) {
    return absl::InvalidArgumentError("psi_ratio must lie in (0, 1]");
  }
  ASSIGN_OR_RETURN(const SplitData test, EvaluateSplit(model, ds, SplitRole::kTest));
  const int n = test.rows.size();
  if (n < options.min_rows) {
    return absl::FailedPreconditionError(absl::StrCat(
        "resilience needs at least ", options.min_rows, " test rows, got ", n));
  }
  ResilienceResult out;
  out.scenario = options.scenario;
  out.metric = metric;
  ASSIGN_OR_RETURN(out.baseline, RequireMetric(metric, test.y, test.score));

  std::vector<int> numeric;
  for (int j = 0; j < model.schema.size(); ++j) {
    if (model.schema.features[j].kind == ColumnKind::kNumeric) numeric.push_back(j);
  }
  // Test rows standardized with the train mean and sd.
  auto standardized = [&]() {
    const Rows train = ds.MakeRows(ds.RowsIn(SplitRole::kTrain));
    Eigen::MatrixXd z(n, numeric.size());
    for (size_t k = 0; k < numeric.size(); ++k) {
      const Eigen::VectorXd c = train.x.col(numeric[k]);
      const std::span<const double> cs(c.data(), c.size());
      const double mean = Mean(cs), sd = SampleSd(cs);
      for (int i = 0; i < n; ++i) {
        z(i, k) = sd > 0 ? (test.rows.x(i, numeric[k]) - mean) / sd : 0.0;
      }
    }
    return z;
  };

  std::vector<int> order;
  switch (options.scenario) {
    case ResilienceScenario::kWorstSample:
      order = WorstSampleOrder(model.task, test.y, test.score);
      break;
    case ResilienceScenario::kOuterSample: {
      if (numeric.empty()) return absl::InvalidArgumentError("outer-sample needs numeric features");
      const Eigen::MatrixXd z = standardized();
      const Eigen::VectorXd dist = z.rowwise().squaredNorm();
      order.resize(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return dist[a] > dist[b]; });
      break;
    }
    case ResilienceScenario::kWorstCluster: {
      if (numeric.empty()) return absl::InvalidArgumentError("worst-cluster needs numeric features");
      if (options.clusters < 1) return absl::InvalidArgumentError("clusters must be >= 1");
      const Eigen::MatrixXd z = standardized();
      std::vector<std::vector<double>> distinct(n, std::vector<double>(z.cols()));
      for (int i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < z.cols(); ++c) distinct[i][c] = z(i, c);
      }
      std::sort(distinct.begin(), distinct.end());
      const int unique = static_cast<int>(
          std::unique(distinct.begin(), distinct.end()) - distinct.begin());
      int k = options.clusters;
      if (k > unique) {
        out.warnings.push_back(absl::StrCat("k reduced from ", k, " to ", unique,
                                            " (distinct test rows)"));
        k = unique;
      }
      const KMeansResult km = KMeans(z, k, options.restarts, options.seed);
      out.clusters_used = k;
      std::vector<std::vector<int>> members(k);
      for (int i = 0; i < n; ++i) members[km.assignment[i]].push_back(i);
      const bool higher = HigherIsBetter(metric);
      for (int c = 0; c < k; ++c) {
        ClusterStat s;
        s.cluster = c;
        s.n = static_cast<int>(members[c].size());
        std::vector<double> ys, ss;
        for (const int i : members[c]) {
          ys.push_back(test.y[i]);
          ss.push_back(test.score[i]);
        }
        if (s.n > 0) s.metric = ComputeMetric(metric, ys, ss);
        out.clusters.push_back(std::move(s));
      }
      std::vector<int> rank(k);
      std::iota(rank.begin(), rank.end(), 0);
      auto worse = [&](int a, int b) {
        const auto& ma = out.clusters[a].metric;
        const auto& mb = out.clusters[b].metric;
        if (ma.has_value() != mb.has_value()) return ma.has_value();
        if (!ma) return false;
        return higher ? *ma < *mb : *ma > *mb;
      };
      std::stable_sort(rank.begin(), rank.end(), worse);
      if (out.clusters[rank[0]].metric) out.worst_cluster = rank[0];
      for (const int c : rank) order.insert(order.end(), members[c].begin(), members[c].end());
      break;
    }
  }
  out.points = RetainedCurve(metric, test.y, test.score, order, options.ratios);

  const int worst_n = std::clamp(static_cast<int>(std::ceil(options.psi_ratio * n - 1e-9)), 1, n);
  for (int j = 0; j < model.schema.size(); ++j) {
    const FeatureInfo& info = model.schema.features[j];
    std::vector<double> all(n), worst(worst_n);
    for (int i = 0; i < n; ++i) all[i] = test.rows.x(i, j);
    for (int k = 0; k < worst_n; ++k) worst[k] = test.rows.x(order[k], j);
    double psi = 0.0;
    if (info.kind == ColumnKind::kNumeric) {
      psi = Psi(worst, all, options.psi_bins);
    } else {
      const int levels = std::max<int>(1, info.levels.size());
      std::vector<double> p(levels, 0.0), q(levels, 0.0);
      for (const double v : worst) p[static_cast<int>(v)] += 1.0;
      for (const double v : all) q[static_cast<int>(v)] += 1.0;
      for (int l = 0; l < levels; ++l) {
        const double ps = std::max(p[l] / worst_n, 1e-6);
        const double qs = std::max(q[l] / n, 1e-6);
        psi += (ps - qs) * std::log(ps / qs);
      }
    }
    out.psi.push_back({info.name, psi});
  }
  return out;
}

std::optional<double> AdverseImpactRatio(double protected_rate,
                                         double reference_rate) {
  if (!(reference_rate > 0)) return std::nullopt;
  return protected_rate / reference_rate;
}

namespace {

struct GroupStats {
  std::vector<std::string> labels;
  std::vector<int> group;  // per row
};

// Smallest AIR over the included non-reference groups at threshold t.
std::optional<double> MinAir(const std::vector<int>& group,
                             std::span<const double> score, double t,
                             int reference, const std::vector<uint8_t>& included) {
  const int g = static_cast<int>(included.size());
  std::vector<double> fav(g, 0.0), count(g, 0.0);
  for (size_t i = 0; i < group.size(); ++i) {
    count[group[i]] += 1.0;
    if (score[i] >= t) fav[group[i]] += 1.0;
  }
  std::optional<double> out;
  for (int k = 0; k < g; ++k) {
    if (k == reference || !included[k] || count[k] == 0) continue;
    const auto air = AdverseImpactRatio(fav[k] / count[k], fav[reference] / count[reference]);
    if (!air) return std::nullopt;
    out = out ? std::min(*out, *air) : *air;
  }
  return out;
}

std::vector<GroupRate> Rates(const GroupStats& groups, std::span<const int> rows,
                             std::span<const double> score, double t,
                             int reference, const std::vector<uint8_t>& included) {
  const int g = static_cast<int>(groups.labels.size());
  std::vector<double> fav(g, 0.0);
  std::vector<int> count(g, 0);
  for (const int i : rows) {
    ++count[groups.group[i]];
    if (score[i] >= t) fav[groups.group[i]] += 1.0;
  }
  const double ref_rate = count[reference] > 0 ? fav[reference] / count[reference] : 0.0;
  std::vector<GroupRate> out;
  for (int k = 0; k < g; ++k) {
    GroupRate r;
    r.group = groups.labels[k];
    r.n = count[k];
    r.excluded = !included[k];
    if (count[k] > 0) r.favorable_rate = fav[k] / count[k];
    if (!r.excluded && count[k] > 0 && count[reference] > 0) {
      r.air = AdverseImpactRatio(r.favorable_rate, ref_rate);
      r.flagged = r.air && *r.air < kFourFifths;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

absl::StatusOr<FairnessResult> Fairness(const TrainedModel& model,
                                        const Dataset& ds,
                                        const FairnessOptions& options) {
  if (model.task != TaskKind::kBinary) {
    return absl::InvalidArgumentError("fairness supports binary tasks only");
  }
  const int pj = model.schema.IndexOf(options.protected_feature);
  if (pj < 0) {
    return absl::NotFoundError(absl::StrCat(
        "unknown protected feature '", options.protected_feature, "'"));
  }
  ASSIGN_OR_RETURN(const SplitData test, EvaluateSplit(model, ds, SplitRole::kTest));
  const int n = test.rows.size();
  const FeatureInfo& info = model.schema.features[pj];

  SliceAxis axis;
  if (info.kind == ColumnKind::kCategorical) {
    axis = MakeSliceAxis(info, pj, {}, SliceBinning::kQuantile, 1);
  } else {
    if (options.protected_cuts.empty()) {
      return absl::InvalidArgumentError(
          "a numeric protected feature needs protected_cuts to define groups");
    }
    axis.feature = info.name;
    axis.feature_index = pj;
    const Eigen::VectorXd c = test.rows.x.col(pj);
    axis.lo = c.minCoeff();
    axis.hi = c.maxCoeff();
    axis.cuts = options.protected_cuts;
    std::sort(axis.cuts.begin(), axis.cuts.end());
    axis.cuts.erase(std::unique(axis.cuts.begin(), axis.cuts.end()), axis.cuts.end());
  }
  GroupStats groups;
  for (int b = 0; b < axis.num_bins(); ++b) groups.labels.push_back(axis.Label(b));
  groups.group.resize(n);
  for (int i = 0; i < n; ++i) groups.group[i] = axis.Bin(test.rows.x(i, pj));
  const auto ref_it = std::find(groups.labels.begin(), groups.labels.end(), options.reference_group);
  if (ref_it == groups.labels.end()) {
    std::string known;
    for (const auto& l : groups.labels) absl::StrAppend(&known, known.empty() ? "" : ", ", l);
    return absl::NotFoundError(absl::StrCat("unknown reference group '",
                                            options.reference_group, "'; groups: ", known));
  }
  const int reference = static_cast<int>(ref_it - groups.labels.begin());

  FairnessResult out;
  out.protected_feature = info.name;
  out.reference_group = options.reference_group;
  out.threshold = options.threshold;
  const int g = static_cast<int>(groups.labels.size());
  std::vector<int> count(g, 0);
  for (const int k : groups.group) ++count[k];
  std::vector<uint8_t> included(g, 1);
  for (int k = 0; k < g; ++k) {
    if (count[k] < options.min_group_size) {
      included[k] = 0;
      out.warnings.push_back(absl::StrCat("group '", groups.labels[k], "' has ", count[k],
                                          " rows (< ", options.min_group_size, "), excluded"));
    }
  }
  if (!included[reference]) {
    return absl::FailedPreconditionError("the reference group is below the minimum group size");
  }
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  out.groups = Rates(groups, all, test.score, options.threshold, reference, included);

  if (!options.segment_feature.empty()) {
    const int sj = model.schema.IndexOf(options.segment_feature);
    if (sj < 0) {
      return absl::NotFoundError(absl::StrCat(
          "unknown segment feature '", options.segment_feature, "'"));
    }
    const Eigen::VectorXd c = test.rows.x.col(sj);
    const SliceAxis seg = MakeSliceAxis(model.schema.features[sj], sj,
                                        std::span<const double>(c.data(), c.size()),
                                        SliceBinning::kQuantile, options.segment_bins);
    std::vector<std::vector<int>> members(seg.num_bins());
    for (int i = 0; i < n; ++i) members[seg.Bin(c[i])].push_back(i);
    for (int b = 0; b < seg.num_bins(); ++b) {
      FairnessSegment s;
      s.label = absl::StrCat(seg.feature, " ", seg.Label(b));
      s.groups = Rates(groups, members[b], test.score, options.threshold, reference, included);
      out.segments.push_back(std::move(s));
    }
  }

  if (options.debias) {
    for (int p = 1; p <= 99; ++p) {
      DebiasOption d;
      d.kind = "threshold";
      d.threshold = Quantile(test.score, p / 100.0);
      d.air = MinAir(groups.group, test.score, d.threshold, reference, included);
      d.accuracy = ComputeMetric(Metric::kAcc, test.y, test.score, d.threshold);
      out.frontier.push_back(std::move(d));
    }
    if (!options.debias_feature.empty()) {
      if (!model.reevaluable()) {
        return CapabilityError("binning de-bias needs a model that can score modified rows");
      }
      const int bj = model.schema.IndexOf(options.debias_feature);
      if (bj < 0) {
        return absl::NotFoundError(absl::StrCat(
            "unknown de-bias feature '", options.debias_feature, "'"));
      }
      if (model.schema.features[bj].kind != ColumnKind::kNumeric) {
        return absl::InvalidArgumentError("the de-bias feature must be numeric");
      }
      const Rows train = ds.MakeRows(ds.RowsIn(SplitRole::kTrain));
      const Eigen::VectorXd tc = train.x.col(bj);
      const std::span<const double> train_values(tc.data(), tc.size());
      for (const int bins : options.debias_bins) {
        if (bins < 1) return absl::InvalidArgumentError("de-bias bins must be >= 1");
        const std::vector<double> cuts = QuantileCuts(train_values, bins);
        const int k = static_cast<int>(cuts.size()) + 1;
        std::vector<std::vector<double>> per_bin(k);
        for (const double v : train_values) per_bin[BinIndex(cuts, v)].push_back(v);
        std::vector<double> representative(k, 0.0);
        for (int b = 0; b < k; ++b) {
          if (!per_bin[b].empty()) representative[b] = Quantile(per_bin[b], 0.5);
        }
        Rows coarse;
        coarse.x = test.rows.x;
        for (int i = 0; i < n; ++i) {
          coarse.x(i, bj) = representative[BinIndex(cuts, coarse.x(i, bj))];
        }
        ASSIGN_OR_RETURN(const std::vector<double> score, Predict(model, coarse));
        DebiasOption d;
        d.kind = "binning";
        d.threshold = options.threshold;
        d.bins = bins;
        d.air = MinAir(groups.group, score, options.threshold, reference, included);
        d.accuracy = ComputeMetric(Metric::kAcc, test.y, score, options.threshold);
        out.frontier.push_back(std::move(d));
      }
    }
  }
  return out;
}

}  // namespace workbench
