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

#ifndef WORKBENCH_STATS_H_
#define WORKBENCH_STATS_H_

#include <optional>
#include <span>
#include <vector>

namespace workbench {

// Quantile by linear interpolation between order statistics (Hyndman-Fan
// type 7). `sorted` must be ascending and non-empty; p is clamped to [0, 1].
double QuantileSorted(std::span<const double> sorted, double p);

// Same as QuantileSorted on an unsorted copy.
double Quantile(std::span<const double> values, double p);

double Mean(std::span<const double> values);

// Sample standard deviation (denominator n - 1). Zero for n < 2.
double SampleSd(std::span<const double> values);

// Population standard deviation (denominator n).
double PopulationSd(std::span<const double> values);

// Weighted mean and weighted (population) variance. Zero-weight entries are
// ignored. Returns 0 when the total weight is 0.
double WeightedMean(std::span<const double> values,
                    std::span<const double> weights);
double WeightedVariance(std::span<const double> values,
                        std::span<const double> weights);

// Pearson correlation. Absent when either side has zero variance or n < 2.
std::optional<double> Pearson(std::span<const double> x,
                              std::span<const double> y);

// Ranks starting at 1, ties receive the average of their ranks.
std::vector<double> AverageRanks(std::span<const double> values);

// Spearman correlation: Pearson on average ranks.
std::optional<double> Spearman(std::span<const double> x,
                               std::span<const double> y);

// Ascending, de-duplicated quantile cut points at probabilities k / bins for
// k = 1..bins-1. Used for quantile binning everywhere.
std::vector<double> QuantileCuts(std::span<const double> values, int bins);

// Index of the bin for `value` given ascending interior cuts: the number of
// cuts strictly less than `value`. A value equal to a cut falls on its left.
int BinIndex(std::span<const double> cuts, double value);

}  // namespace workbench

#endif  // WORKBENCH_STATS_H_
