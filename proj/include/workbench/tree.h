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

#ifndef WORKBENCH_TREE_H_
#define WORKBENCH_TREE_H_

#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "workbench/dataset.h"

namespace workbench {

struct TreeParams {
  int max_depth = 5;
  int min_samples_leaf = 5;
};

struct TreeNode {
  // Internal nodes: split feature and condition. Leaves: feature == -1.
  int feature = -1;
  // Numeric: rows with value <= threshold go left.
  double threshold = 0.0;
  // Categorical: sorted level codes that go left; others go right.
  std::vector<int> left_levels;
  int left = -1;
  int right = -1;
  // Weighted mean target of the training rows reaching the node.
  double value = 0.0;
  int count = 0;
  // Impurity decrease achieved by the split (weighted, total scale).
  double gain = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
  TreeParams params;
  bool classification = false;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

bool GoesLeft(const TreeNode& node, double value);
int TreeLeaf(const TreeModel& model, std::span<const double> row);
std::vector<int> TreePath(const TreeModel& model, std::span<const double> row);
double TreePredict(const TreeModel& model, std::span<const double> row);

// Total impurity decrease per feature (unnormalized).
std::vector<double> TreeImpurityDecrease(const TreeModel& model,
                                         int num_features);

// Greedy CART: variance reduction for regression, Gini for binary targets.
// Numeric thresholds are midpoints between consecutive distinct values;
// categorical splits scan prefixes of the levels ordered by target mean.
// Ties go to the lower feature index, then the lower threshold.
absl::StatusOr<TreeModel> FitTree(const Schema& schema, const Rows& rows,
                                  std::span<const double> y,
                                  std::span<const double> weights,
                                  TaskKind task, const TreeParams& params);

}  // namespace workbench

#endif  // WORKBENCH_TREE_H_
