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

#include "workbench/binning.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "workbench/stats.h"

namespace workbench {

int BinEdges::Bin(double value) const { return BinIndex(cuts, value); }

std::vector<double> BinEdges::Edges() const {
  std::vector<double> out{lo};
  out.insert(out.end(), cuts.begin(), cuts.end());
  out.push_back(hi);
  return out;
}

BinEdges QuantileBinning(std::span<const double> x, int max_bins) {
  BinEdges out;
  out.lo = *std::min_element(x.begin(), x.end());
  out.hi = *std::max_element(x.begin(), x.end());
  out.constant = out.lo == out.hi;
  if (!out.constant) {
    for (const double c : QuantileCuts(x, max_bins)) {
      if (c > out.lo && c < out.hi) out.cuts.push_back(c);
    }
  }
  return out;
}

namespace {

struct Segment {
  int begin = 0;  // range in sorted order
  int end = 0;
  int best_split = -1;  // first index of the right part
  double best_gain = 0.0;
};

}  // namespace

absl::StatusOr<BinEdges> OptimalBinning(std::span<const double> x,
                                        std::span<const double> y,
                                        int max_bins) {
  if (x.empty() || x.size() != y.size()) {
    return absl::InvalidArgumentError("binning needs matching non-empty x, y");
  }
  if (max_bins < 1) return absl::InvalidArgumentError("max_bins must be >= 1");
  const int n = static_cast<int>(x.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return x[a] < x[b]; });
  std::vector<double> xs(n), prefix(n + 1, 0.0), prefix_sq(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    const double t = y[order[i]];
    prefix[i + 1] = prefix[i] + t;
    prefix_sq[i + 1] = prefix_sq[i] + t * t;
  }
  BinEdges out;
  out.lo = xs.front();
  out.hi = xs.back();
  if (out.lo == out.hi) {
    out.constant = true;
    return out;
  }

  const int min_leaf = std::max(
      1, static_cast<int>(std::ceil(kOptimalBinMinLeafFraction * n)));
  auto sse = [&](int a, int b) {
    const double s = prefix[b] - prefix[a];
    return std::max(0.0, prefix_sq[b] - prefix_sq[a] - s * s / (b - a));
  };
  const double total_sse = sse(0, n);
  const double min_gain = 1e-12 * std::max(1.0, total_sse);
  auto find_split = [&](Segment* seg) {
    seg->best_split = -1;
    seg->best_gain = 0.0;
    const double parent = sse(seg->begin, seg->end);
    for (int k = seg->begin + min_leaf; k <= seg->end - min_leaf; ++k) {
      if (xs[k - 1] == xs[k]) continue;
      const double gain = parent - sse(seg->begin, k) - sse(k, seg->end);
      if (gain > seg->best_gain + min_gain) {
        seg->best_gain = gain;
        seg->best_split = k;
      }
    }
  };

  std::vector<Segment> leaves{{0, n}};
  find_split(&leaves[0]);
  while (static_cast<int>(leaves.size()) < max_bins) {
    int pick = -1;
    for (int l = 0; l < static_cast<int>(leaves.size()); ++l) {
      if (leaves[l].best_split < 0) continue;
      if (pick < 0 || leaves[l].best_gain > leaves[pick].best_gain) pick = l;
    }
    if (pick < 0) break;
    Segment left{leaves[pick].begin, leaves[pick].best_split};
    Segment right{leaves[pick].best_split, leaves[pick].end};
    find_split(&left);
    find_split(&right);
    leaves[pick] = left;
    leaves.insert(leaves.begin() + pick + 1, right);
  }
  if (leaves.size() == 1) {
    BinEdges fallback = QuantileBinning(x, max_bins);
    fallback.quantile_fallback = true;
    return fallback;
  }
  for (size_t l = 1; l < leaves.size(); ++l) {
    const int k = leaves[l].begin;
    out.cuts.push_back(xs[k - 1] + 0.5 * (xs[k] - xs[k - 1]));
  }
  return out;
}

}  // namespace workbench
