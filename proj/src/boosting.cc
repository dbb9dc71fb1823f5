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

#include "workbench/boosting.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "absl/strings/str_cat.h"
#include "workbench/random.h"
#include "workbench/status.h"

namespace workbench {

double FeatureBinning::Encode(double raw) const {
  if (kind == ColumnKind::kNumeric) return raw;
  const int code = static_cast<int>(raw);
  if (code < 0 || code >= static_cast<int>(level_encoding.size())) {
    return unseen_level_value;
  }
  return level_encoding[code];
}

const PairEffect* EffectRepresentation::FindPair(int first, int second) const {
  for (const auto& p : pairs) {
    if (p.first == first && p.second == second) return &p;
  }
  return nullptr;
}

double EffectRepresentation::Evaluate(std::span<const int> bins) const {
  double sum = intercept;
  for (size_t j = 0; j < main.size(); ++j) sum += main[j][bins[j]];
  for (const auto& p : pairs) sum += p.at(bins[p.first], bins[p.second]);
  return sum;
}

bool EffectRepresentation::has_weights() const {
  if (main_weights.size() != main.size()) return false;
  for (size_t j = 0; j < main.size(); ++j) {
    if (main_weights[j].size() != main[j].size()) return false;
  }
  for (const auto& p : pairs) {
    if (p.weights.size() != p.values.size()) return false;
  }
  return true;
}

double BoostedTree::Evaluate(std::span<const int> bins) const {
  int index = 0;
  while (nodes[index].feature >= 0) {
    const BoostNode& node = nodes[index];
    index = bins[node.feature] <= node.cut ? node.left : node.right;
  }
  return nodes[index].value;
}

BoostParams DefaultXgb1Params() {
  BoostParams p;
  p.max_depth = 1;
  p.max_bins = 10;
  return p;
}

BoostParams DefaultXgb2Params() {
  BoostParams p;
  p.max_depth = 2;
  p.max_bins = 32;
  return p;
}

std::vector<int> BoostedModel::Bins(std::span<const double> row) const {
  std::vector<int> bins(binning.size());
  for (size_t j = 0; j < binning.size(); ++j) bins[j] = binning[j].Bin(row[j]);
  return bins;
}

double BoostedModel::Margin(std::span<const double> row) const {
  return effects.Evaluate(Bins(row));
}

double BoostedModel::TreeMargin(std::span<const double> row) const {
  const auto bins = Bins(row);
  double margin = base_score;
  for (const auto& tree : trees) margin += tree.Evaluate(bins);
  return margin;
}

namespace {

double Sigmoid(double m) {
  if (m >= 0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

double Loss(BoostLoss loss, double y, double margin) {
  if (loss == BoostLoss::kSquared) return 0.5 * (y - margin) * (y - margin);
  const double softplus =
      margin > 0 ? margin + std::log1p(std::exp(-margin)) : std::log1p(std::exp(margin));
  return softplus - y * margin;
}

struct GradStats {
  double g = 0;
  double h = 0;
};

struct SplitChoice {
  int feature = -1;
  int cut = -1;
  double gain = 0.0;
  GradStats left, right;
};

class TreeGrower {
 public:
  TreeGrower(const std::vector<std::vector<int>>& bins,  // [feature][row]
             const std::vector<int>& num_bins, const BoostParams& params)
      : bins_(bins), num_bins_(num_bins), params_(params) {}

  double LeafWeight(const GradStats& s) const {
    return -s.g / (s.h + params_.reg_lambda);
  }

  double Score(const GradStats& s) const {
    return s.g * s.g / (s.h + params_.reg_lambda);
  }

  // Best split of `rows` over all features; ties keep the lowest feature,
  // then the lowest cut.
  SplitChoice FindSplit(const std::vector<int>& rows,
                        const std::vector<double>& g,
                        const std::vector<double>& h) const {
    SplitChoice best;
    GradStats total;
    for (const int i : rows) {
      total.g += g[i];
      total.h += h[i];
    }
    const double parent = Score(total);
    for (size_t f = 0; f < bins_.size(); ++f) {
      const int nb = num_bins_[f];
      if (nb < 2) continue;
      std::vector<GradStats> hist(nb);
      for (const int i : rows) {
        hist[bins_[f][i]].g += g[i];
        hist[bins_[f][i]].h += h[i];
      }
      GradStats left;
      for (int c = 0; c + 1 < nb; ++c) {
        left.g += hist[c].g;
        left.h += hist[c].h;
        const GradStats right{total.g - left.g, total.h - left.h};
        if (left.h < params_.min_child_weight ||
            right.h < params_.min_child_weight) {
          continue;
        }
        const double gain = 0.5 * (Score(left) + Score(right) - parent);
        if (gain > best.gain + 1e-12) {
          best.feature = static_cast<int>(f);
          best.cut = c;
          best.gain = gain;
          best.left = left;
          best.right = right;
        }
      }
    }
    return best;
  }

  // Grows a tree of depth <= max_depth. Returns false when the root has no
  // positive-gain split.
  bool Grow(const std::vector<int>& rows, const std::vector<double>& g,
            const std::vector<double>& h, BoostedTree* tree) const {
    tree->nodes.clear();
    const SplitChoice root = FindSplit(rows, g, h);
    if (root.feature < 0) return false;
    tree->nodes.push_back({root.feature, root.cut, -1, -1, 0.0});
    std::vector<int> left_rows, right_rows;
    for (const int i : rows) {
      (bins_[root.feature][i] <= root.cut ? left_rows : right_rows).push_back(i);
    }
    tree->nodes[0].left = AddChild(left_rows, root.left, g, h, 2, tree);
    tree->nodes[0].right = AddChild(right_rows, root.right, g, h, 2, tree);
    return true;
  }

 private:
  int AddChild(const std::vector<int>& rows, const GradStats& stats,
               const std::vector<double>& g, const std::vector<double>& h,
               int depth, BoostedTree* tree) const {
    const int index = static_cast<int>(tree->nodes.size());
    tree->nodes.push_back({-1, -1, -1, -1, params_.learning_rate * LeafWeight(stats)});
    if (depth > params_.max_depth) return index;
    const SplitChoice split = FindSplit(rows, g, h);
    if (split.feature < 0) return index;
    const int left = static_cast<int>(tree->nodes.size());
    tree->nodes.push_back({-1, -1, -1, -1, params_.learning_rate * LeafWeight(split.left)});
    const int right = left + 1;
    tree->nodes.push_back({-1, -1, -1, -1, params_.learning_rate * LeafWeight(split.right)});
    tree->nodes[index] = {split.feature, split.cut, left, right, 0.0};
    return index;
  }

  const std::vector<std::vector<int>>& bins_;
  const std::vector<int>& num_bins_;
  const BoostParams& params_;
};

PairEffect& GetOrAddPair(EffectRepresentation* e, int a, int b,
                         const std::vector<int>& num_bins) {
  const int first = std::min(a, b);
  const int second = std::max(a, b);
  auto it = std::lower_bound(
      e->pairs.begin(), e->pairs.end(), std::make_pair(first, second),
      [](const PairEffect& p, const std::pair<int, int>& key) {
        return std::make_pair(p.first, p.second) < key;
      });
  if (it != e->pairs.end() && it->first == first && it->second == second) {
    return *it;
  }
  PairEffect p;
  p.first = first;
  p.second = second;
  p.rows = num_bins[first];
  p.cols = num_bins[second];
  p.values.assign(static_cast<size_t>(p.rows) * p.cols, 0.0);
  return *e->pairs.insert(it, std::move(p));
}

// Adds the piecewise-constant function of `tree` into the effect tables.
void AccumulateTree(const BoostedTree& tree, const std::vector<int>& num_bins,
                    EffectRepresentation* e) {
  const BoostNode& root = tree.nodes[0];
  if (root.feature < 0) {
    e->intercept += root.value;
    return;
  }
  const int a = root.feature;
  for (const int side : {root.left, root.right}) {
    const bool is_left = side == root.left;
    const BoostNode& child = tree.nodes[side];
    auto in_side = [&](int bin_a) {
      return is_left ? bin_a <= root.cut : bin_a > root.cut;
    };
    if (child.feature < 0) {
      for (int ba = 0; ba < num_bins[a]; ++ba) {
        if (in_side(ba)) e->main[a][ba] += child.value;
      }
      continue;
    }
    const int b = child.feature;
    const double lv = tree.nodes[child.left].value;
    const double rv = tree.nodes[child.right].value;
    if (b == a) {
      for (int ba = 0; ba < num_bins[a]; ++ba) {
        if (in_side(ba)) e->main[a][ba] += ba <= child.cut ? lv : rv;
      }
      continue;
    }
    PairEffect& pair = GetOrAddPair(e, a, b, num_bins);
    for (int ba = 0; ba < num_bins[a]; ++ba) {
      if (!in_side(ba)) continue;
      for (int bb = 0; bb < num_bins[b]; ++bb) {
        const double v = bb <= child.cut ? lv : rv;
        if (a < b) {
          pair.at(ba, bb) += v;
        } else {
          pair.at(bb, ba) += v;
        }
      }
    }
  }
}

}  // namespace

EffectRepresentation BuildEffects(const BoostedModel& model, const Rows& rows) {
  const int d = static_cast<int>(model.binning.size());
  std::vector<int> num_bins(d);
  for (int j = 0; j < d; ++j) num_bins[j] = model.binning[j].num_bins();
  EffectRepresentation e;
  e.intercept = model.base_score;
  e.main.resize(d);
  for (int j = 0; j < d; ++j) e.main[j].assign(num_bins[j], 0.0);
  for (const auto& tree : model.trees) AccumulateTree(tree, num_bins, &e);

  const double n = std::max(1, rows.size());
  e.main_weights.resize(d);
  for (int j = 0; j < d; ++j) e.main_weights[j].assign(num_bins[j], 0.0);
  for (auto& p : e.pairs) p.weights.assign(p.values.size(), 0.0);
  for (int i = 0; i < rows.size(); ++i) {
    const auto bins = model.Bins(rows.row(i));
    for (int j = 0; j < d; ++j) e.main_weights[j][bins[j]] += 1.0 / n;
    for (auto& p : e.pairs) {
      p.weights[bins[p.first] * p.cols + bins[p.second]] += 1.0 / n;
    }
  }
  return e;
}

absl::StatusOr<BoostedModel> FitBoosted(const Schema& schema, const Rows& rows,
                                        std::span<const double> y,
                                        std::span<const double> weights,
                                        TaskKind task,
                                        const BoostParams& params) {
  if (params.max_depth != 1 && params.max_depth != 2) {
    return absl::InvalidArgumentError("boosting max_depth must be 1 or 2");
  }
  if (params.rounds < 1 || params.rounds > 100000) {
    return absl::InvalidArgumentError("boosting rounds must lie in [1, 100000]");
  }
  if (!(params.learning_rate > 0 && params.learning_rate <= 1)) {
    return absl::InvalidArgumentError("learning_rate must lie in (0, 1]");
  }
  if (params.max_bins < 2 || params.max_bins > 1024) {
    return absl::InvalidArgumentError("max_bins must lie in [2, 1024]");
  }
  if (params.reg_lambda < 0 || params.min_child_weight < 0) {
    return absl::InvalidArgumentError("reg_lambda and min_child_weight must be >= 0");
  }
  if (params.early_stopping &&
      !(params.validation_ratio > 0 && params.validation_ratio < 1)) {
    return absl::InvalidArgumentError("validation_ratio must lie in (0, 1)");
  }
  if (params.patience < 1) return absl::InvalidArgumentError("patience must be >= 1");

  const int n = rows.size();
  const int d = schema.size();
  BoostedModel model;
  model.params = params;
  model.loss = task == TaskKind::kBinary ? BoostLoss::kLogistic : BoostLoss::kSquared;

  std::vector<int> fit_rows(n), valid_rows;
  std::iota(fit_rows.begin(), fit_rows.end(), 0);
  if (params.early_stopping) {
    Rng rng(DeriveSeed(params.seed, SeedStream::kValidation));
    std::shuffle(fit_rows.begin(), fit_rows.end(), rng);
    const int n_valid = static_cast<int>(std::lround(params.validation_ratio * n));
    if (n_valid >= 1 && n - n_valid >= 2) {
      valid_rows.assign(fit_rows.begin(), fit_rows.begin() + n_valid);
      fit_rows.erase(fit_rows.begin(), fit_rows.begin() + n_valid);
    }
    std::sort(fit_rows.begin(), fit_rows.end());
    std::sort(valid_rows.begin(), valid_rows.end());
  }

  // Binning on the train rows (categoricals via target-mean encoding).
  double y_mean = 0, w_total = 0;
  for (int i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    y_mean += w * y[i];
    w_total += w;
  }
  y_mean /= w_total;
  model.binning.resize(d);
  for (int j = 0; j < d; ++j) {
    FeatureBinning& fb = model.binning[j];
    fb.kind = schema.features[j].kind;
    if (fb.kind == ColumnKind::kCategorical) {
      const int levels = static_cast<int>(schema.features[j].levels.size());
      std::vector<double> sum(levels, 0.0), count(levels, 0.0);
      for (int i = 0; i < n; ++i) {
        const int code = static_cast<int>(rows.x(i, j));
        if (code < 0 || code >= levels) continue;
        sum[code] += y[i];
        count[code] += 1;
      }
      fb.level_encoding.resize(levels);
      for (int l = 0; l < levels; ++l) {
        fb.level_encoding[l] = count[l] > 0 ? sum[l] / count[l] : y_mean;
      }
      fb.unseen_level_value = y_mean;
    }
    std::vector<double> encoded(n);
    for (int i = 0; i < n; ++i) encoded[i] = fb.Encode(rows.x(i, j));
    if (params.max_depth == 1) {
      ASSIGN_OR_RETURN(fb.edges, OptimalBinning(encoded, y, params.max_bins));
    } else {
      fb.edges = QuantileBinning(encoded, params.max_bins);
    }
  }

  std::vector<int> num_bins(d);
  std::vector<std::vector<int>> bins(d, std::vector<int>(n));
  for (int j = 0; j < d; ++j) {
    num_bins[j] = model.binning[j].num_bins();
    for (int i = 0; i < n; ++i) bins[j][i] = model.binning[j].Bin(rows.x(i, j));
  }

  // Initial margin from the fitting rows.
  double fit_mean = 0, fit_w = 0;
  for (const int i : fit_rows) {
    const double w = weights.empty() ? 1.0 : weights[i];
    fit_mean += w * y[i];
    fit_w += w;
  }
  fit_mean /= fit_w;
  if (model.loss == BoostLoss::kLogistic) {
    if (fit_mean <= 0 || fit_mean >= 1) {
      return absl::InvalidArgumentError("degenerate binary target: one class");
    }
    model.base_score = std::log(fit_mean / (1 - fit_mean));
  } else {
    model.base_score = fit_mean;
  }

  std::vector<double> margin(n, model.base_score);
  std::vector<double> g(n, 0.0), h(n, 0.0);
  auto mean_loss = [&](const std::vector<int>& idx) {
    double sum = 0, wsum = 0;
    for (const int i : idx) {
      const double w = weights.empty() ? 1.0 : weights[i];
      sum += w * Loss(model.loss, y[i], margin[i]);
      wsum += w;
    }
    return wsum > 0 ? sum / wsum : 0.0;
  };

  TreeGrower grower(bins, num_bins, params);
  double best_valid = std::numeric_limits<double>::infinity();
  int best_rounds = 0;
  int since_best = 0;
  std::vector<int> row_bins(d);
  for (int round = 0; round < params.rounds; ++round) {
    for (const int i : fit_rows) {
      const double w = weights.empty() ? 1.0 : weights[i];
      if (model.loss == BoostLoss::kSquared) {
        g[i] = w * (margin[i] - y[i]);
        h[i] = w;
      } else {
        const double p = Sigmoid(margin[i]);
        g[i] = w * (p - y[i]);
        h[i] = w * p * (1 - p);
      }
    }
    BoostedTree tree;
    if (!grower.Grow(fit_rows, g, h, &tree)) break;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) row_bins[j] = bins[j][i];
      margin[i] += tree.Evaluate(row_bins);
    }
    model.trees.push_back(std::move(tree));
    model.train_loss.push_back(mean_loss(fit_rows));
    if (!valid_rows.empty()) {
      const double v = mean_loss(valid_rows);
      model.validation_loss.push_back(v);
      if (v < best_valid) {
        best_valid = v;
        best_rounds = static_cast<int>(model.trees.size());
        since_best = 0;
      } else if (++since_best >= params.patience) {
        break;
      }
    } else {
      best_rounds = static_cast<int>(model.trees.size());
    }
  }
  model.trees.resize(best_rounds);
  model.best_rounds = best_rounds;
  model.effects = BuildEffects(model, rows);
  // Depth-1 ensembles have no pair tables; purification then only centers the
  // main effects.
  if (params.max_depth == 1 || params.purify) {
    ASSIGN_OR_RETURN(const PurifyReport report, Purify(&model.effects));
    (void)report;
  }
  return model;
}

double MaxWeightedMarginalMean(const EffectRepresentation& e) {
  double worst = 0.0;
  for (const auto& p : e.pairs) {
    for (int a = 0; a < p.rows; ++a) {
      double sw = 0, s = 0;
      for (int b = 0; b < p.cols; ++b) {
        sw += p.weight(a, b);
        s += p.weight(a, b) * p.at(a, b);
      }
      if (sw > 0) worst = std::max(worst, std::abs(s / sw));
    }
    for (int b = 0; b < p.cols; ++b) {
      double sw = 0, s = 0;
      for (int a = 0; a < p.rows; ++a) {
        sw += p.weight(a, b);
        s += p.weight(a, b) * p.at(a, b);
      }
      if (sw > 0) worst = std::max(worst, std::abs(s / sw));
    }
  }
  for (size_t j = 0; j < e.main.size(); ++j) {
    double sw = 0, s = 0;
    for (size_t b = 0; b < e.main[j].size(); ++b) {
      sw += e.main_weights[j][b];
      s += e.main_weights[j][b] * e.main[j][b];
    }
    if (sw > 0) worst = std::max(worst, std::abs(s / sw));
  }
  return worst;
}

absl::StatusOr<PurifyReport> Purify(EffectRepresentation* e) {
  if (!e->has_weights()) {
    return absl::FailedPreconditionError("purify needs bin weights from train data");
  }
  PurifyReport report;
  for (int sweep = 1; sweep <= kPurifyMaxSweeps; ++sweep) {
    report.sweeps = sweep;
    for (auto& p : e->pairs) {
      auto& main_first = e->main[p.first];
      auto& main_second = e->main[p.second];
      for (int a = 0; a < p.rows; ++a) {
        double sw = 0, s = 0;
        for (int b = 0; b < p.cols; ++b) {
          sw += p.weight(a, b);
          s += p.weight(a, b) * p.at(a, b);
        }
        if (sw <= 0) continue;
        const double mean = s / sw;
        for (int b = 0; b < p.cols; ++b) p.at(a, b) -= mean;
        main_first[a] += mean;
      }
      for (int b = 0; b < p.cols; ++b) {
        double sw = 0, s = 0;
        for (int a = 0; a < p.rows; ++a) {
          sw += p.weight(a, b);
          s += p.weight(a, b) * p.at(a, b);
        }
        if (sw <= 0) continue;
        const double mean = s / sw;
        for (int a = 0; a < p.rows; ++a) p.at(a, b) -= mean;
        main_second[b] += mean;
      }
    }
    for (size_t j = 0; j < e->main.size(); ++j) {
      double sw = 0, s = 0;
      for (size_t b = 0; b < e->main[j].size(); ++b) {
        sw += e->main_weights[j][b];
        s += e->main_weights[j][b] * e->main[j][b];
      }
      if (sw <= 0) continue;
      const double mean = s / sw;
      for (double& v : e->main[j]) v -= mean;
      e->intercept += mean;
    }
    report.max_marginal_mean = MaxWeightedMarginalMean(*e);
    if (report.max_marginal_mean <= kPurifyTolerance) break;
  }
  e->purified = true;
  return report;
}

}  // namespace workbench
