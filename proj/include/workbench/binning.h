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

#ifndef WORKBENCH_BINNING_H_
#define WORKBENCH_BINNING_H_

#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace workbench {

// Bins of one numeric feature: [lo, c_1], (c_1, c_2], ..., (c_m, hi].
// Values outside [lo, hi] fall into the first or last bin.
struct BinEdges {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> cuts;  // strictly increasing, inside (lo, hi)
  bool constant = false;          // single distinct value
  bool quantile_fallback = false; // supervised binning found no split

  int num_bins() const { return static_cast<int>(cuts.size()) + 1; }
  int Bin(double value) const;
  // lo, cuts..., hi
  std::vector<double> Edges() const;
};

inline constexpr int kDefaultOptimalBins = 10;
inline constexpr double kOptimalBinMinLeafFraction = 0.05;

// Supervised binning: a single-feature regression tree on the target grown
// best-first up to `max_bins` leaves with leaves of at least 5% of the rows.
// Falls back to quantile cuts when no split improves the fit.
absl::StatusOr<BinEdges> OptimalBinning(std::span<const double> x,
                                        std::span<const double> y,
                                        int max_bins = kDefaultOptimalBins);

BinEdges QuantileBinning(std::span<const double> x, int max_bins);

}  // namespace workbench

#endif  // WORKBENCH_BINNING_H_
