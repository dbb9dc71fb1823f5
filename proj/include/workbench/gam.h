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

#ifndef WORKBENCH_GAM_H_
#define WORKBENCH_GAM_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "workbench/dataset.h"

namespace workbench {

// Cubic B-spline basis on a clamped knot vector (boundary knots repeated four
// times). Inputs outside the boundary are clamped to it.
class CubicBSplineBasis {
 public:
  CubicBSplineBasis() = default;
  CubicBSplineBasis(double lo, double hi, std::vector<double> interior);

  int size() const { return static_cast<int>(knots_.size()) - 4; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& knots() const { return knots_; }
  std::vector<double> interior_knots() const;

  // Writes the 4 non-zero basis values into `values` and returns the index of
  // the first one.
  int Evaluate(double x, double values[4]) const;
  double Combine(double x, std::span<const double> coefficients) const;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<double> knots_;
};

struct GamParams {
  // Smoothing penalty. When absent it is selected from the geometric grid
  // {1e-3, ..., 1e3} by validation loss on a 20% carve-out of train.
  std::optional<double> lambda;
  int num_knots = 8;  // interior knots at training quantiles
  int max_iterations = 50;  // penalized IRLS cap (binary)
  uint64_t seed = 0;
};

struct GamShape {
  int feature = 0;
  ColumnKind kind = ColumnKind::kNumeric;
  // Numeric: spline coefficients and the centering offset subtracted from the
  // spline so that the shape has zero train mean.
  CubicBSplineBasis basis;
  std::vector<double> coefficients;
  double offset = 0.0;
  // Categorical: centered level offsets, indexed by level code.
  std::vector<double> level_values;

  double Evaluate(double value) const;
};

struct GamModel {
  GamParams params;
  double lambda = 0.0;
  bool lambda_selected = false;
  // (lambda, validation loss) pairs when selected.
  std::vector<std::pair<double, double>> validation_losses;
  bool logistic = false;
  double intercept = 0.0;
  std::vector<GamShape> shapes;
  int iterations = 0;
};

double GamMargin(const GamModel& model, std::span<const double> row);

// Sum over spline shapes of c' D2' D2 c (second-difference roughness).
double GamRoughness(const GamModel& model);

inline constexpr double kGamLambdaGrid[] = {1e-3, 1e-2, 1e-1, 1.0,
                                            1e1,  1e2,  1e3};

absl::StatusOr<GamModel> FitGam(const Schema& schema, const Rows& rows,
                                std::span<const double> y,
                                std::span<const double> weights, TaskKind task,
                                const GamParams& params);

}  // namespace workbench

#endif  // WORKBENCH_GAM_H_
