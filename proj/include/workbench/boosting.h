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

#ifndef WORKBENCH_BOOSTING_H_
#define WORKBENCH_BOOSTING_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "workbench/binning.h"
#include "workbench/dataset.h"

namespace workbench {

// Discretization of one input feature for the boosted models. Categorical
// features are first mapped to the train target mean of their level.
struct FeatureBinning {
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<double> level_encoding;  // categorical only
  double unseen_level_value = 0.0;
  BinEdges edges;

  double Encode(double raw) const;
  int Bin(double raw) const { return edges.Bin(Encode(raw)); }
  int num_bins() const { return edges.num_bins(); }
};

// Pairwise effect table over the bin grids of features first < second,
// stored row-major (first-bin major).
struct PairEffect {
  int first = 0;
  int second = 0;
  int rows = 0;  // bins of `first`
  int cols = 0;  // bins of `second`
  std::vector<double> values;
  std::vector<double> weights;  // empirical train frequency per cell

  double& at(int a, int b) { return values[a * cols + b]; }
  double at(int a, int b) const { return values[a * cols + b]; }
  double weight(int a, int b) const { return weights[a * cols + b]; }
};

// Functional-ANOVA form of a depth-1/depth-2 tree ensemble:
//   f(x) = intercept + sum_j main_j(bin_j) + sum_{j<k} pair_jk(bin_j, bin_k).
struct EffectRepresentation {
  double intercept = 0.0;
  std::vector<std::vector<double>> main;          // per feature, per bin
  std::vector<std::vector<double>> main_weights;  // train frequency per bin
  std::vector<PairEffect> pairs;                  // sorted by (first, second)
  bool purified = false;

  const PairEffect* FindPair(int first, int second) const;
  double Evaluate(std::span<const int> bins) const;
  bool has_weights() const;
};

// A node of a boosted tree on binned features. Internal nodes send bins
// <= cut to the left child. Leaf values already include the learning rate.
struct BoostNode {
  int feature = -1;
  int cut = -1;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct BoostedTree {
  std::vector<BoostNode> nodes;  // nodes[0] is the root
  double Evaluate(std::span<const int> bins) const;
};

enum class BoostLoss { kSquared, kLogistic };

struct BoostParams {
  int max_depth = 1;  // 1 for XGB1, 2 for XGB2
  int rounds = 500;
  double learning_rate = 0.1;
  // Bins per feature: optimal binning for depth 1, quantile for depth 2.
  int max_bins = 10;
  double reg_lambda = 1.0;
  double min_child_weight = 1.0;
  bool early_stopping = true;
  double validation_ratio = 0.2;
  int patience = 20;
  bool purify = true;  // depth 2 only
  uint64_t seed = 0;
};

BoostParams DefaultXgb1Params();
BoostParams DefaultXgb2Params();

struct BoostedModel {
  BoostParams params;
  BoostLoss loss = BoostLoss::kSquared;
  double base_score = 0.0;  // initial margin
  std::vector<FeatureBinning> binning;
  std::vector<BoostedTree> trees;
  EffectRepresentation effects;
  // Per-round loss on the fitting rows and on the validation carve-out.
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  int best_rounds = 0;

  std::vector<int> Bins(std::span<const double> row) const;
  double Margin(std::span<const double> row) const;
  // Margin recomputed from the tree list rather than the effect tables.
  double TreeMargin(std::span<const double> row) const;
};

absl::StatusOr<BoostedModel> FitBoosted(const Schema& schema, const Rows& rows,
                                        std::span<const double> y,
                                        std::span<const double> weights,
                                        TaskKind task,
                                        const BoostParams& params);

// Rebuilds the effect tables from the tree list and fills bin weights from
// `rows` (the train rows).
EffectRepresentation BuildEffects(const BoostedModel& model, const Rows& rows);

inline constexpr double kPurifyTolerance = 1e-10;
inline constexpr int kPurifyMaxSweeps = 100;

struct PurifyReport {
  int sweeps = 0;
  double max_marginal_mean = 0.0;
};

// Largest absolute weighted marginal mean: pair row/column means and main
// effect means.
double MaxWeightedMarginalMean(const EffectRepresentation& effects);

// Iterative weighted marginal centering: pair row (column) means move into
// the first (second) feature's main effect, main effect means move into the
// intercept. Predictions are unchanged.
absl::StatusOr<PurifyReport> Purify(EffectRepresentation* effects);

}  // namespace workbench

#endif  // WORKBENCH_BOOSTING_H_
