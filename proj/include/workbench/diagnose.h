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

#ifndef WORKBENCH_DIAGNOSE_H_
#define WORKBENCH_DIAGNOSE_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "workbench/dataset.h"
#include "workbench/metrics.h"
#include "workbench/model.h"

namespace workbench {

// ---------------------------------------------------------------- accuracy

struct AccuracyResult {
  MetricSet train;
  MetricSet test;
};

absl::StatusOr<AccuracyResult> Accuracy(const TrainedModel& model,
                                        const Dataset& ds,
                                        double threshold = 0.5);

// ----------------------------------------------------------------- slicing

enum class SliceBinning { kUniform, kQuantile };

std::string_view SliceBinningName(SliceBinning binning);
absl::StatusOr<SliceBinning> ParseSliceBinning(std::string_view name);

struct SliceSpec {
  std::vector<std::string> features;  // one or two
  SliceBinning binning = SliceBinning::kQuantile;
  int bins = 10;
  // Default: max(20, 1% of the sliced rows).
  std::optional<int> min_samples;
};

int DefaultMinSamples(int num_rows);

// Partition of one slicing feature. Numeric bins are [lo, c_1], (c_1, c_2],
// ..., (c_m, hi]; categorical features get one bin per level.
struct SliceAxis {
  std::string feature;
  int feature_index = 0;
  ColumnKind kind = ColumnKind::kNumeric;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> cuts;
  std::vector<std::string> levels;

  int num_bins() const;
  int Bin(double value) const;
  std::string Label(int bin) const;
};

// Builds the axis from the observed `values` of the feature.
SliceAxis MakeSliceAxis(const FeatureInfo& info, int feature_index,
                        std::span<const double> values, SliceBinning binning,
                        int bins);

struct SliceCell {
  std::vector<int> bins;            // per axis
  std::vector<std::string> labels;  // per axis
  int n = 0;
  double metric = 0.0;
  bool weak = false;
};

struct WeakRegion {
  std::string feature;
  int first_bin = 0;
  int last_bin = 0;
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
  double metric = 0.0;
};

struct WeakspotResult {
  SliceSpec spec;
  Metric metric = Metric::kMse;
  double ratio = 1.1;
  int min_samples = 0;
  double overall = 0.0;
  std::vector<SliceAxis> axes;
  std::vector<SliceCell> slices;  // row-major over the axes
  std::vector<WeakRegion> regions;  // 1D only
};

// Slices the test split and flags slices whose mean per-row loss (squared
// error or log loss) is at least `ratio` times the overall test loss.
absl::StatusOr<WeakspotResult> Weakspot(const TrainedModel& model,
                                        const Dataset& ds,
                                        const SliceSpec& spec,
                                        double ratio = 1.1);

struct OverfitCell {
  std::vector<int> bins;
  std::vector<std::string> labels;
  int n_train = 0;
  int n_test = 0;
  bool skipped = false;
  double train_metric = 0.0;
  double test_metric = 0.0;
  double gap = 0.0;  // test - train
  bool overfit = false;
  bool underfit = false;
};

struct OverfitResult {
  SliceSpec spec;
  Metric metric = Metric::kMse;
  double delta = 0.0;
  int min_samples_train = 0;
  int min_samples_test = 0;
  double overall_train = 0.0;
  double overall_test = 0.0;
  std::vector<SliceAxis> axes;
  std::vector<OverfitCell> slices;
};

// Slices are built on the train values and applied to both splits. The
// default delta is max(0.5 * overall train loss, 1e-12).
absl::StatusOr<OverfitResult> OverfitUnderfit(
    const TrainedModel& model, const Dataset& ds, const SliceSpec& spec,
    std::optional<double> delta = std::nullopt);

// ------------------------------------------------------------- reliability

struct ReliabilityOptions {
  double alpha = 0.1;
  double calibration_ratio = 0.2;
  uint64_t seed = 0;
  // Optional slicing for per-slice coverage and width (regression).
  std::optional<SliceSpec> slice;
};

struct ReliabilitySlice {
  std::string label;
  int n = 0;
  double coverage = 0.0;
  double mean_width = 0.0;
};

struct ReliabilityResult {
  TaskKind task = TaskKind::kRegression;
  double alpha = 0.1;
  double calibration_ratio = 0.2;
  uint64_t seed = 0;
  int calibration_size = 0;
  int test_size = 0;
  int rank = 0;  // q_hat is the rank-th smallest calibration score
  double q_hat = 0.0;
  double coverage = 0.0;
  double mean_width = 0.0;     // regression
  double mean_set_size = 0.0;  // binary
  std::string recipe;
  std::vector<ReliabilitySlice> slices;
};

// Rank of the conformal quantile, ceil((n_cal + 1)(1 - alpha)). Fails when it
// exceeds n_cal.
absl::StatusOr<int> ConformalRank(int calibration_size, double alpha);

absl::StatusOr<ReliabilityResult> Reliability(const TrainedModel& model,
                                              const Dataset& ds,
                                              const ReliabilityOptions& options);

// -------------------------------------------------------------- robustness

struct RobustnessOptions {
  std::vector<double> scales = {0.0, 0.1, 0.2, 0.3, 0.4};
  int repeats = 10;
  uint64_t seed = 0;
  std::vector<std::string> features;  // empty: all numeric features
  std::optional<Metric> metric;
};

struct RobustnessPoint {
  double scale = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> values;
};

struct RobustnessResult {
  Metric metric = Metric::kMse;
  double baseline = 0.0;
  std::vector<std::string> features;
  int repeats = 0;
  uint64_t seed = 0;
  std::vector<RobustnessPoint> points;
};

absl::StatusOr<RobustnessResult> Robustness(const TrainedModel& model,
                                            const Dataset& ds,
                                            const RobustnessOptions& options);

// -------------------------------------------------------------- resilience

enum class ResilienceScenario { kWorstSample, kWorstCluster, kOuterSample };

std::string_view ResilienceScenarioName(ResilienceScenario scenario);
absl::StatusOr<ResilienceScenario> ParseResilienceScenario(std::string_view name);

struct ResilienceOptions {
  ResilienceScenario scenario = ResilienceScenario::kWorstSample;
  std::vector<double> ratios = {1.0, 0.9, 0.8, 0.7, 0.6,
                                0.5, 0.4, 0.3, 0.2, 0.1};
  std::optional<Metric> metric;
  int clusters = 10;
  int restarts = 20;
  uint64_t seed = 0;
  int min_rows = 100;
  int psi_bins = 10;
  double psi_ratio = 0.1;
};

struct ResiliencePoint {
  double ratio = 0.0;
  int n = 0;
  std::optional<double> metric;
};

struct ClusterStat {
  int cluster = 0;
  int n = 0;
  std::optional<double> metric;
};

struct PsiEntry {
  std::string feature;
  double psi = 0.0;
};

struct ResilienceResult {
  ResilienceScenario scenario = ResilienceScenario::kWorstSample;
  Metric metric = Metric::kMse;
  double baseline = 0.0;
  std::vector<ResiliencePoint> points;
  std::vector<ClusterStat> clusters;  // worst-cluster only
  int worst_cluster = -1;
  int clusters_used = 0;
  std::vector<PsiEntry> psi;
  std::vector<std::string> warnings;
};

// Metric on the first ceil(ratio * n) rows of `order` for each ratio.
std::vector<ResiliencePoint> RetainedCurve(Metric metric,
                                           std::span<const double> y,
                                           std::span<const double> score,
                                           std::span<const int> order,
                                           std::span<const double> ratios);

// Rows ordered by per-row loss, largest first (ties by row order).
std::vector<int> WorstSampleOrder(TaskKind task, std::span<const double> y,
                                  std::span<const double> score);

// Population stability index between `sample` and `reference` over bins
// given by quantile cuts of the reference; empty shares are floored at 1e-6.
double Psi(std::span<const double> sample, std::span<const double> reference,
           int bins);

struct KMeansResult {
  std::vector<int> assignment;
  Eigen::MatrixXd centers;
  double inertia = 0.0;
};

// Lloyd iterations from k-means++ seeds; the best of `restarts` runs.
KMeansResult KMeans(const Eigen::MatrixXd& points, int k, int restarts,
                    uint64_t seed);

absl::StatusOr<ResilienceResult> Resilience(const TrainedModel& model,
                                            const Dataset& ds,
                                            const ResilienceOptions& options);

// ---------------------------------------------------------------- fairness

inline constexpr double kFourFifths = 0.8;

struct FairnessOptions {
  std::string protected_feature;
  // Numeric protected features are grouped by these cuts.
  std::vector<double> protected_cuts;
  std::string reference_group;
  double threshold = 0.5;
  int min_group_size = 30;
  std::string segment_feature;
  int segment_bins = 5;
  bool debias = true;
  // Alternative binnings for de-bias: the feature is coarsened to each bin
  // count (values replaced by their bin's train median) and re-scored.
  std::string debias_feature;
  std::vector<int> debias_bins = {2, 3, 5, 10};
};

struct GroupRate {
  std::string group;
  int n = 0;
  double favorable_rate = 0.0;
  std::optional<double> air;  // absent when the reference rate is 0
  bool flagged = false;
  bool excluded = false;
};

struct FairnessSegment {
  std::string label;
  std::vector<GroupRate> groups;
};

struct DebiasOption {
  std::string kind;  // "threshold" or "binning"
  double threshold = 0.5;
  int bins = 0;
  std::optional<double> air;  // smallest AIR over the protected groups
  std::optional<double> accuracy;
};

struct FairnessResult {
  std::string protected_feature;
  std::string reference_group;
  double threshold = 0.5;
  std::vector<GroupRate> groups;
  std::vector<FairnessSegment> segments;
  std::vector<DebiasOption> frontier;
  std::vector<std::string> warnings;
};

// Adverse impact ratio; absent when the reference rate is zero.
std::optional<double> AdverseImpactRatio(double protected_rate,
                                         double reference_rate);

absl::StatusOr<FairnessResult> Fairness(const TrainedModel& model,
                                        const Dataset& ds,
                                        const FairnessOptions& options);

}  // namespace workbench

#endif  // WORKBENCH_DIAGNOSE_H_
