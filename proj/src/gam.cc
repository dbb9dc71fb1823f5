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

#include "workbench/gam.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "Eigen/Dense"
#include "workbench/metrics.h"
#include "workbench/random.h"
#include "workbench/stats.h"
#include "workbench/status.h"

namespace workbench {

CubicBSplineBasis::CubicBSplineBasis(double lo, double hi,
                                     std::vector<double> interior)
    : lo_(lo), hi_(hi) {
  knots_.assign(4, lo);
  for (const double k : interior) {
    if (k > lo && k < hi && (knots_.back() < k)) knots_.push_back(k);
  }
  knots_.insert(knots_.end(), 4, hi);
}

std::vector<double> CubicBSplineBasis::interior_knots() const {
  return {knots_.begin() + 4, knots_.end() - 4};
}

int CubicBSplineBasis::Evaluate(double x, double values[4]) const {
  const int m = size();
  x = std::clamp(x, lo_, hi_);
  // Knot span s with knots[s] <= x < knots[s + 1], s in [3, m - 1].
  int s = static_cast<int>(
              std::upper_bound(knots_.begin() + 4, knots_.begin() + m, x) -
              knots_.begin()) - 1;
  s = std::clamp(s, 3, m - 1);
  double left[4], right[4];
  values[0] = 1.0;
  for (int j = 1; j <= 3; ++j) {
    left[j] = x - knots_[s + 1 - j];
    right[j] = knots_[s + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? values[r] / denom : 0.0;
      values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[j] = saved;
  }
  return s - 3;
}

double CubicBSplineBasis::Combine(double x,
                                  std::span<const double> coefficients) const {
  double values[4];
  const int first = Evaluate(x, values);
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) sum += values[k] * coefficients[first + k];
  return sum;
}

double GamShape::Evaluate(double value) const {
  if (kind == ColumnKind::kNumeric) {
    if (coefficients.empty()) return 0.0;
    return basis.Combine(value, coefficients) - offset;
  }
  const int code = static_cast<int>(value);
  if (code < 0 || code >= static_cast<int>(level_values.size())) return 0.0;
  return level_values[code];
}

double GamMargin(const GamModel& model, std::span<const double> row) {
  double margin = model.intercept;
  for (const auto& shape : model.shapes) {
    margin += shape.Evaluate(row[shape.feature]);
  }
  return margin;
}

namespace {

Eigen::MatrixXd SecondDifference(int m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(std::max(m - 2, 0), m);
  for (int i = 0; i + 2 < m; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  return d;
}

// Column layout of the penalized design.
struct DesignLayout {
  std::vector<GamShape> shapes;  // bases/levels set, coefficients empty
  std::vector<int> offsets;      // first design column per shape
  int num_columns = 1;           // column 0 is the intercept
};

DesignLayout BuildLayout(const Schema& schema, const Rows& rows,
                         std::span<const int> fit_rows, int num_knots) {
  DesignLayout layout;
  for (int f = 0; f < schema.size(); ++f) {
    GamShape shape;
    shape.feature = f;
    shape.kind = schema.features[f].kind;
    if (shape.kind == ColumnKind::kNumeric) {
      std::vector<double> v;
      v.reserve(fit_rows.size());
      for (const int i : fit_rows) v.push_back(rows.x(i, f));
      std::sort(v.begin(), v.end());
      if (v.front() == v.back()) continue;  // constant: no shape
      std::vector<double> interior;
      for (int k = 1; k <= num_knots; ++k) {
        interior.push_back(
            QuantileSorted(v, static_cast<double>(k) / (num_knots + 1)));
      }
      shape.basis = CubicBSplineBasis(v.front(), v.back(), interior);
      layout.offsets.push_back(layout.num_columns);
      layout.num_columns += shape.basis.size();
    } else {
      const int levels =
          static_cast<int>(schema.features[f].levels.size());
      if (levels < 2) continue;
      shape.level_values.assign(levels, 0.0);
      layout.offsets.push_back(layout.num_columns);
      layout.num_columns += levels;
    }
    layout.shapes.push_back(std::move(shape));
  }
  return layout;
}

Eigen::MatrixXd BuildDesign(const DesignLayout& layout, const Rows& rows,
                            std::span<const int> fit_rows) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(fit_rows.size()), layout.num_columns);
  for (size_t r = 0; r < fit_rows.size(); ++r) {
    const int i = fit_rows[r];
    d(r, 0) = 1.0;
    for (size_t s = 0; s < layout.shapes.size(); ++s) {
      const GamShape& shape = layout.shapes[s];
      const double x = rows.x(i, shape.feature);
      if (shape.kind == ColumnKind::kNumeric) {
        double values[4];
        const int first = shape.basis.Evaluate(x, values);
        for (int k = 0; k < 4; ++k) d(r, layout.offsets[s] + first + k) = values[k];
      } else {
        const int code = static_cast<int>(x);
        if (code >= 0 && code < static_cast<int>(shape.level_values.size())) {
          d(r, layout.offsets[s] + code) = 1.0;
        }
      }
    }
  }
  return d;
}

Eigen::MatrixXd BuildPenalty(const DesignLayout& layout, double lambda) {
  const int p = layout.num_columns;
  Eigen::MatrixXd penalty = Eigen::MatrixXd::Zero(p, p);
  for (size_t s = 0; s < layout.shapes.size(); ++s) {
    const GamShape& shape = layout.shapes[s];
    const int o = layout.offsets[s];
    if (shape.kind == ColumnKind::kNumeric) {
      const int m = shape.basis.size();
      const Eigen::MatrixXd d2 = SecondDifference(m);
      penalty.block(o, o, m, m) += lambda * d2.transpose() * d2;
    }
  }
  // The basis of each shape sums to one like the intercept; a tiny ridge on
  // the shape blocks resolves the redundancy. Centering happens afterwards.
  for (int c = 1; c < p; ++c) penalty(c, c) += 1e-9;
  return penalty;
}

struct SolveResult {
  Eigen::VectorXd coef;
  int iterations = 0;
};

absl::StatusOr<SolveResult> SolvePenalized(const Eigen::MatrixXd& design,
                                           const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& w,
                                           const Eigen::MatrixXd& penalty,
                                           bool logistic, int max_iterations) {
  const double n = static_cast<double>(design.rows());
  SolveResult out;
  if (!logistic) {
    const Eigen::MatrixXd lhs =
        design.transpose() * w.asDiagonal() * design / n + penalty;
    const Eigen::VectorXd rhs = design.transpose() * w.cwiseProduct(y) / n;
    Eigen::LDLT<Eigen::MatrixXd> solver(lhs);
    if (solver.info() != Eigen::Success) {
      return absl::InternalError("GAM normal equations are singular");
    }
    out.coef = solver.solve(rhs);
    out.iterations = 1;
    return out;
  }
  const double ybar = w.cwiseProduct(y).sum() / w.sum();
  out.coef = Eigen::VectorXd::Zero(design.cols());
  out.coef[0] = std::log(ybar / (1.0 - ybar));
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::VectorXd eta = design * out.coef;
    Eigen::VectorXd work_w(eta.size()), work_z(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-eta[i]));
      const double curvature = std::max(p * (1 - p), 1e-6);
      work_w[i] = w[i] * curvature;
      work_z[i] = eta[i] + (y[i] - p) / curvature;
    }
    const Eigen::MatrixXd lhs =
        design.transpose() * work_w.asDiagonal() * design / n + penalty;
    const Eigen::VectorXd rhs =
        design.transpose() * work_w.cwiseProduct(work_z) / n;
    Eigen::LDLT<Eigen::MatrixXd> solver(lhs);
    if (solver.info() != Eigen::Success) {
      return absl::InternalError("GAM IRLS system is singular");
    }
    const Eigen::VectorXd next = solver.solve(rhs);
    const double change = (next - out.coef).cwiseAbs().maxCoeff();
    out.coef = next;
    if (change < 1e-8) break;
  }
  return out;
}

absl::StatusOr<GamModel> FitWithLambda(const Schema& schema, const Rows& rows,
                                       std::span<const double> y,
                                       std::span<const double> weights,
                                       std::span<const int> fit_rows,
                                       bool logistic, double lambda,
                                       const GamParams& params) {
  DesignLayout layout = BuildLayout(schema, rows, fit_rows, params.num_knots);
  const Eigen::MatrixXd design = BuildDesign(layout, rows, fit_rows);
  const Eigen::MatrixXd penalty = BuildPenalty(layout, lambda);
  const Eigen::Index n = static_cast<Eigen::Index>(fit_rows.size());
  Eigen::VectorXd target(n), w(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    target[r] = y[fit_rows[r]];
    w[r] = weights.empty() ? 1.0 : weights[fit_rows[r]];
  }
  ASSIGN_OR_RETURN(const SolveResult solved,
                   SolvePenalized(design, target, w, penalty, logistic,
                                  params.max_iterations));
  GamModel model;
  model.params = params;
  model.lambda = lambda;
  model.logistic = logistic;
  model.iterations = solved.iterations;
  model.intercept = solved.coef[0];
  const double weight_sum = w.sum();
  for (size_t s = 0; s < layout.shapes.size(); ++s) {
    GamShape shape = layout.shapes[s];
    const int o = layout.offsets[s];
    if (shape.kind == ColumnKind::kNumeric) {
      shape.coefficients.assign(solved.coef.data() + o,
                                solved.coef.data() + o + shape.basis.size());
    } else {
      for (size_t l = 0; l < shape.level_values.size(); ++l) {
        shape.level_values[l] = solved.coef[o + static_cast<int>(l)];
      }
    }
    // Center on the fitting rows and move the mean into the intercept.
    double mean = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      mean += w[r] * shape.Evaluate(rows.x(fit_rows[r], shape.feature));
    }
    mean /= weight_sum;
    if (shape.kind == ColumnKind::kNumeric) {
      shape.offset = mean;
    } else {
      for (double& v : shape.level_values) v -= mean;
    }
    model.intercept += mean;
    model.shapes.push_back(std::move(shape));
  }
  return model;
}

}  // namespace

double GamRoughness(const GamModel& model) {
  double total = 0.0;
  for (const auto& shape : model.shapes) {
    if (shape.kind != ColumnKind::kNumeric) continue;
    const auto& c = shape.coefficients;
    for (size_t i = 0; i + 2 < c.size(); ++i) {
      const double d = c[i] - 2 * c[i + 1] + c[i + 2];
      total += d * d;
    }
  }
  return total;
}

absl::StatusOr<GamModel> FitGam(const Schema& schema, const Rows& rows,
                                std::span<const double> y,
                                std::span<const double> weights, TaskKind task,
                                const GamParams& params) {
  if (params.num_knots < 1 || params.num_knots > 100) {
    return absl::InvalidArgumentError("gam num_knots must lie in [1, 100]");
  }
  if (params.lambda && !(*params.lambda >= 0 && std::isfinite(*params.lambda))) {
    return absl::InvalidArgumentError("gam lambda must be finite and >= 0");
  }
  const bool logistic = task == TaskKind::kBinary;
  std::vector<int> all(rows.size());
  std::iota(all.begin(), all.end(), 0);
  if (params.lambda) {
    return FitWithLambda(schema, rows, y, weights, all, logistic,
                         *params.lambda, params);
  }

  std::vector<int> shuffled = all;
  Rng rng(DeriveSeed(params.seed, SeedStream::kGamValidation));
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const int n_valid = std::max(1, static_cast<int>(std::lround(0.2 * rows.size())));
  std::vector<int> valid(shuffled.begin(), shuffled.begin() + n_valid);
  std::vector<int> fit(shuffled.begin() + n_valid, shuffled.end());
  std::sort(valid.begin(), valid.end());
  std::sort(fit.begin(), fit.end());

  double best_lambda = kGamLambdaGrid[0];
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> losses;
  for (const double lambda : kGamLambdaGrid) {
    auto candidate = FitWithLambda(schema, rows, y, weights, fit, logistic,
                                   lambda, params);
    if (!candidate.ok()) continue;
    double loss = 0.0;
    for (const int i : valid) {
      const double margin = GamMargin(*candidate, rows.row(i));
      const double score = logistic ? 1.0 / (1.0 + std::exp(-margin)) : margin;
      loss += RowLoss(task, y[i], score);
    }
    loss /= static_cast<double>(valid.size());
    losses.emplace_back(lambda, loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_lambda = lambda;
    }
  }
  ASSIGN_OR_RETURN(GamModel model, FitWithLambda(schema, rows, y, weights, all,
                                                 logistic, best_lambda, params));
  model.lambda_selected = true;
  model.validation_losses = std::move(losses);
  return model;
}

}  // namespace workbench
