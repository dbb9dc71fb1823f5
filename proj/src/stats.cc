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

#include "workbench/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace workbench {

double QuantileSorted(std::span<const double> sorted, double p) {
  const size_t n = sorted.size();
  if (n == 1) return sorted[0];
  p = std::clamp(p, 0.0, 1.0);
  const double h = (static_cast<double>(n) - 1.0) * p;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double Quantile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return QuantileSorted(sorted, p);
}

double Mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

namespace {

double SumSquaredDeviations(std::span<const double> values) {
  const double mean = Mean(values);
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return ss;
}

}  // namespace

double SampleSd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  return std::sqrt(SumSquaredDeviations(values) /
                   static_cast<double>(values.size() - 1));
}

double PopulationSd(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::sqrt(SumSquaredDeviations(values) /
                   static_cast<double>(values.size()));
}

double WeightedMean(std::span<const double> values,
                    std::span<const double> weights) {
  double sum = 0.0;
  double total = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    sum += weights[i] * values[i];
    total += weights[i];
  }
  return total > 0.0 ? sum / total : 0.0;
}

double WeightedVariance(std::span<const double> values,
                        std::span<const double> weights) {
  const double mean = WeightedMean(values, weights);
  double sum = 0.0;
  double total = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    sum += weights[i] * (values[i] - mean) * (values[i] - mean);
    total += weights[i];
  }
  return total > 0.0 ? sum / total : 0.0;
}

std::optional<double> Pearson(std::span<const double> x,
                              std::span<const double> y) {
  const size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = Mean(x);
  const double my = Mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> AverageRanks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> Spearman(std::span<const double> x,
                               std::span<const double> y) {
  const auto rx = AverageRanks(x);
  const auto ry = AverageRanks(y);
  return Pearson(rx, ry);
}

std::vector<double> QuantileCuts(std::span<const double> values, int bins) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  if (sorted.empty() || bins < 2) return cuts;
  for (int k = 1; k < bins; ++k) {
    const double q = QuantileSorted(sorted, static_cast<double>(k) / bins);
    // A cut at the maximum would leave an empty last bin.
    if (q >= sorted.back()) continue;
    if (cuts.empty() || q > cuts.back()) cuts.push_back(q);
  }
  return cuts;
}

int BinIndex(std::span<const double> cuts, double value) {
  return static_cast<int>(
      std::lower_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
}

}  // namespace workbench
