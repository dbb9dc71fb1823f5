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

#ifndef WORKBENCH_GLM_H_
#define WORKBENCH_GLM_H_

#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "workbench/dataset.h"

namespace workbench {

// Elastic-net least squares on a standardized design:
//
//   (1 / 2n) sum_i w_i (z_i - b0 - x_i . beta)^2
//       + alpha * (l1_ratio * |beta|_1 + (1 - l1_ratio) / 2 * |beta|_2^2)
//
// solved by cyclic coordinate descent with soft-thresholding. The intercept
// is not penalized.
struct ElasticNetOptions {
  double alpha = 0.0;
  double l1_ratio = 1.0;
  double tolerance = 1e-7;  // on the max coefficient change of a sweep
  int max_sweeps = 10000;
};

struct ElasticNetSolution {
  double intercept = 0.0;
  Eigen::VectorXd beta;
};

struct ElasticNetTrace {
  // Objective after each sweep.
  std::vector<double> objective;
  int sweeps = 0;
  bool converged = false;
};

ElasticNetSolution SolveElasticNet(const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& w,
                                   const ElasticNetOptions& options,
                                   const ElasticNetSolution* warm_start,
                                   ElasticNetTrace* trace);

double ElasticNetObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& w,
                           const ElasticNetOptions& options,
                           const ElasticNetSolution& solution);

// Smallest alpha for which every coefficient is zero at the optimum.
double ElasticNetAlphaMax(const Eigen::MatrixXd& x, const Eigen::VectorXd& z,
                          const Eigen::VectorXd& w, double l1_ratio);

struct GlmParams {
  double alpha = 0.0;
  double l1_ratio = 1.0;
  double tolerance = 1e-7;
  int max_sweeps = 10000;
  int max_outer_iterations = 100;
};

// One column of the GLM design: a numeric feature or one indicator level of a
// categorical feature (the first level is the reference and has no term).
struct GlmTerm {
  int feature = 0;
  int level = -1;
  std::string name;
  // Train mean and population sd used for internal standardization.
  double mean = 0.0;
  double sd = 0.0;
};

struct GlmModel {
  GlmParams params;
  bool logistic = false;
  std::vector<GlmTerm> terms;
  // Coefficients on the original feature scale, one per term.
  std::vector<double> coefficients;
  double intercept = 0.0;
  int iterations = 0;
  bool converged = false;
};

double GlmTermValue(const GlmTerm& term, std::span<const double> row);

// Linear predictor (the margin for logistic models).
double GlmMargin(const GlmModel& model, std::span<const double> row);

absl::StatusOr<GlmModel> FitGlm(const Schema& schema, const Rows& rows,
                                std::span<const double> y,
                                std::span<const double> weights, TaskKind task,
                                const GlmParams& params);

}  // namespace workbench

#endif  // WORKBENCH_GLM_H_
