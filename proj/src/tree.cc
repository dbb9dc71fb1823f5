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

#include "workbench/tree.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace workbench {

bool GoesLeft(const TreeNode& node, double value) {
  if (node.left_levels.empty()) return value <= node.threshold;
  return std::binary_search(node.left_levels.begin(), node.left_levels.end(),
                            static_cast<int>(value));
}

int TreeLeaf(const TreeModel& model, std::span<const double> row) {
  int index = 0;
  while (!model.nodes[index].is_leaf()) {
    const TreeNode& node = model.nodes[index];
    index = GoesLeft(node, row[node.feature]) ? node.left : node.right;
  }
  return index;
}

std::vector<int> TreePath(const TreeModel& model, std::span<const double> row) {
  std::vector<int> path{0};
  int index = 0;
  while (!model.nodes[index].is_leaf()) {
    const TreeNode& node = model.nodes[index];
    index = GoesLeft(node, row[node.feature]) ? node.left : node.right;
    path.push_back(index);
  }
  return path;
}

double TreePredict(const TreeModel& model, std::span<const double> row) {
  return model.nodes[TreeLeaf(model, row)].value;
}

std::vector<double> TreeImpurityDecrease(const TreeModel& model,
                                         int num_features) {
  std::vector<double> out(num_features, 0.0);
  for (const auto& node : model.nodes) {
    if (!node.is_leaf()) out[node.feature] += std::max(node.gain, 0.0);
  }
  return out;
}

namespace {

struct Stats {
  double w = 0;
  double wy = 0;
  double wyy = 0;

  void Add(double weight, double y) {
    w += weight;
    wy += weight * y;
    wyy += weight * y * y;
  }
  Stats operator-(const Stats& o) const { return {w - o.w, wy - o.wy, wyy - o.wyy}; }
};

class Builder {
 public:
  Builder(const Schema& schema, const Rows& rows, std::span<const double> y,
          std::span<const double> weights, bool classification,
          const TreeParams& params)
      : schema_(schema),
        rows_(rows),
        y_(y),
        weights_(weights),
        classification_(classification),
        params_(params) {}

  TreeModel Build() {
    TreeModel model;
    model.params = params_;
    model.classification = classification_;
    std::vector<int> all(rows_.size());
    std::iota(all.begin(), all.end(), 0);
    nodes_.clear();
    Grow(all, 0);
    model.nodes = std::move(nodes_);
    return model;
  }

 private:
  double Weight(int i) const { return weights_.empty() ? 1.0 : weights_[i]; }

  // Total (weight-scaled) impurity of a node.
  double Impurity(const Stats& s) const {
    if (s.w <= 0) return 0.0;
    if (classification_) {
      const double p = s.wy / s.w;
      return s.w * 2.0 * p * (1.0 - p);
    }
    return std::max(0.0, s.wyy - s.wy * s.wy / s.w);
  }

  struct Candidate {
    int feature = -1;
    double threshold = 0;
    std::vector<int> left_levels;
    double gain = -std::numeric_limits<double>::infinity();
  };

  void ScanNumeric(int f, const std::vector<int>& idx, const Stats& total,
                   double parent, Candidate* best) const {
    std::vector<int> order = idx;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return rows_.x(a, f) < rows_.x(b, f);
    });
    const int n = static_cast<int>(order.size());
    const int min_leaf = params_.min_samples_leaf;
    Stats left;
    for (int k = 0; k + 1 < n; ++k) {
      left.Add(Weight(order[k]), y_[order[k]]);
      const double a = rows_.x(order[k], f);
      const double b = rows_.x(order[k + 1], f);
      if (a == b) continue;
      if (k + 1 < min_leaf || n - k - 1 < min_leaf) continue;
      const double gain = parent - Impurity(left) - Impurity(total - left);
      if (gain > best->gain) {
        best->feature = f;
        best->threshold = a + 0.5 * (b - a);
        best->left_levels.clear();
        best->gain = gain;
      }
    }
  }

  void ScanCategorical(int f, const std::vector<int>& idx, const Stats& total,
                       double parent, Candidate* best) const {
    std::map<int, Stats> per_level;
    std::map<int, int> counts;
    for (const int i : idx) {
      const int code = static_cast<int>(rows_.x(i, f));
      per_level[code].Add(Weight(i), y_[i]);
      ++counts[code];
    }
    if (per_level.size() < 2) return;
    std::vector<int> levels;
    for (const auto& [code, s] : per_level) levels.push_back(code);
    std::stable_sort(levels.begin(), levels.end(), [&](int a, int b) {
      const Stats& sa = per_level[a];
      const Stats& sb = per_level[b];
      return sa.wy / sa.w < sb.wy / sb.w;
    });
    const int n = static_cast<int>(idx.size());
    Stats left;
    int left_count = 0;
    for (size_t k = 0; k + 1 < levels.size(); ++k) {
      left = Stats{left.w + per_level[levels[k]].w,
                   left.wy + per_level[levels[k]].wy,
                   left.wyy + per_level[levels[k]].wyy};
      left_count += counts[levels[k]];
      if (left_count < params_.min_samples_leaf ||
          n - left_count < params_.min_samples_leaf) {
        continue;
      }
      const double gain = parent - Impurity(left) - Impurity(total - left);
      if (gain > best->gain) {
        best->feature = f;
        best->threshold = static_cast<double>(k);
        best->left_levels.assign(levels.begin(), levels.begin() + k + 1);
        std::sort(best->left_levels.begin(), best->left_levels.end());
        best->gain = gain;
      }
    }
  }

  int Grow(const std::vector<int>& idx, int depth) {
    Stats total;
    for (const int i : idx) total.Add(Weight(i), y_[i]);
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[index].value = total.w > 0 ? total.wy / total.w : 0.0;
    nodes_[index].count = static_cast<int>(idx.size());

    const double parent = Impurity(total);
    const int n = static_cast<int>(idx.size());
    if (depth >= params_.max_depth || n < 2 * params_.min_samples_leaf ||
        parent <= 1e-12 * std::max(1.0, total.w)) {
      return index;
    }
    Candidate best;
    for (int f = 0; f < schema_.size(); ++f) {
      if (schema_.features[f].kind == ColumnKind::kNumeric) {
        ScanNumeric(f, idx, total, parent, &best);
      } else {
        ScanCategorical(f, idx, total, parent, &best);
      }
    }
    // Zero-gain splits are allowed (e.g. the first split of XOR).
    if (best.feature < 0 || best.gain < -1e-9 * std::max(1.0, parent)) {
      return index;
    }
    std::vector<int> left_idx, right_idx;
    TreeNode probe;
    probe.threshold = best.threshold;
    probe.left_levels = best.left_levels;
    for (const int i : idx) {
      (GoesLeft(probe, rows_.x(i, best.feature)) ? left_idx : right_idx)
          .push_back(i);
    }
    nodes_[index].feature = best.feature;
    nodes_[index].threshold = best.threshold;
    nodes_[index].left_levels = best.left_levels;
    nodes_[index].gain = best.gain;
    const int left = Grow(left_idx, depth + 1);
    const int right = Grow(right_idx, depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  const Schema& schema_;
  const Rows& rows_;
  std::span<const double> y_;
  std::span<const double> weights_;
  bool classification_;
  TreeParams params_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

absl::StatusOr<TreeModel> FitTree(const Schema& schema, const Rows& rows,
                                  std::span<const double> y,
                                  std::span<const double> weights,
                                  TaskKind task, const TreeParams& params) {
  if (params.max_depth < 1 || params.max_depth > 30) {
    return absl::InvalidArgumentError("tree max_depth must lie in [1, 30]");
  }
  if (params.min_samples_leaf < 1) {
    return absl::InvalidArgumentError("tree min_samples_leaf must be >= 1");
  }
  Builder builder(schema, rows, y, weights, task == TaskKind::kBinary, params);
  return builder.Build();
}

}  // namespace workbench
