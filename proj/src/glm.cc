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

#include "workbench/glm.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"

namespace workbench {
namespace {

double SoftThreshold(double value, double gamma) {
  if (value > gamma) return value - gamma;
  if (value < -gamma) return value + gamma;
  return 0.0;
}

double Sigmoid(double margin) {
  if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

}  // namespace

double ElasticNetObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& w,
                           const ElasticNetOptions& options,
                           const ElasticNetSolution& solution) {
  const double n = static_cast<double>(x.rows());
  const Eigen::VectorXd r =
      z - x * solution.beta - Eigen::VectorXd::Constant(x.rows(), solution.intercept);
  const double loss = 0.5 * (w.array() * r.array().square()).sum() / n;
  const double penalty =
      options.alpha *
      (options.l1_ratio * solution.beta.lpNorm<1>() +
       0.5 * (1.0 - options.l1_ratio) * solution.beta.squaredNorm());
  return loss + penalty;
}

double ElasticNetAlphaMax(const Eigen::MatrixXd& x, const Eigen::VectorXd& z,
                          const Eigen::VectorXd& w, double l1_ratio) {
  const double n = static_cast<double>(x.rows());
  const double zbar = (w.array() * z.array()).sum() / w.sum();
  const Eigen::VectorXd r = z.array() - zbar;
  const Eigen::VectorXd wr = w.cwiseProduct(r);
  double max_grad = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    max_grad = std::max(max_grad, std::abs(x.col(j).dot(wr)) / n);
  }
  if (l1_ratio <= 0.0) return std::numeric_limits<double>::infinity();
  return max_grad / l1_ratio;
}

ElasticNetSolution SolveElasticNet(const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& w,
                                   const ElasticNetOptions& options,
                                   const ElasticNetSolution* warm_start,
                                   ElasticNetTrace* trace) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double l1 = options.alpha * options.l1_ratio;
  const double l2 = options.alpha * (1.0 - options.l1_ratio);
  const double weight_sum = w.sum();

  ElasticNetSolution s;
  if (warm_start != nullptr) {
    s = *warm_start;
  } else {
    s.beta = Eigen::VectorXd::Zero(p);
    s.intercept = (w.array() * z.array()).sum() / weight_sum;
  }
  // Weighted column curvature v_j = (1/n) sum_i w_i x_ij^2.
  Eigen::VectorXd curvature(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    curvature[j] = (w.array() * x.col(j).array().square()).sum() * inv_n;
  }
  Eigen::VectorXd residual =
      z - x * s.beta - Eigen::VectorXd::Constant(n, s.intercept);

  bool converged = false;
  int sweep = 0;
  while (sweep < options.max_sweeps) {
    ++sweep;
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (curvature[j] <= 0.0) continue;
      const double old = s.beta[j];
      const double rho =
          (x.col(j).array() * w.array() * residual.array()).sum() * inv_n +
          curvature[j] * old;
      const double updated = SoftThreshold(rho, l1) / (curvature[j] + l2);
      if (updated != old) {
        residual -= (updated - old) * x.col(j);
        s.beta[j] = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    const double shift = (w.array() * residual.array()).sum() / weight_sum;
    if (shift != 0.0) {
      s.intercept += shift;
      residual.array() -= shift;
      max_change = std::max(max_change, std::abs(shift));
    }
    if (trace != nullptr) {
      trace->objective.push_back(ElasticNetObjective(x, z, w, options, s));
    }
    if (max_change < options.tolerance) {
      converged = true;
      break;
    }
  }
  if (trace != nullptr) {
    trace->sweeps = sweep;
    trace->converged = converged;
  }
  return s;
}

double GlmTermValue(const GlmTerm& term, std::span<const double> row) {
  const double v = row[term.feature];
  if (term.level < 0) return v;
  return static_cast<int>(v) == term.level ? 1.0 : 0.0;
}

double GlmMargin(const GlmModel& model, std::span<const double> row) {
  double margin = model.intercept;
  for (size_t t = 0; t < model.terms.size(); ++t) {
    margin += model.coefficients[t] * GlmTermValue(model.terms[t], row);
  }
  return margin;
}

absl::StatusOr<GlmModel> FitGlm(const Schema& schema, const Rows& rows,
                                std::span<const double> y,
                                std::span<const double> weights, TaskKind task,
                                const GlmParams& params) {
  if (params.alpha < 0 || !std::isfinite(params.alpha)) {
    return absl::InvalidArgumentError("glm alpha must be finite and >= 0");
  }
  if (params.l1_ratio < 0 || params.l1_ratio > 1) {
    return absl::InvalidArgumentError("glm l1_ratio must lie in [0, 1]");
  }
  const int n = rows.size();
  GlmModel model;
  model.params = params;
  model.logistic = task == TaskKind::kBinary;

  for (int f = 0; f < schema.size(); ++f) {
    const FeatureInfo& info = schema.features[f];
    if (info.kind == ColumnKind::kNumeric) {
      model.terms.push_back({f, -1, info.name, 0, 0});
    } else {
      for (int l = 1; l < static_cast<int>(info.levels.size()); ++l) {
        model.terms.push_back(
            {f, l, absl::StrCat(info.name, "=", info.levels[l]), 0, 0});
      }
    }
  }
  const int p = static_cast<int>(model.terms.size());

  // Standardized design; constant terms keep a zero column and coefficient.
  Eigen::MatrixXd x(n, p);
  for (int t = 0; t < p; ++t) {
    GlmTerm& term = model.terms[t];
    double sum = 0;
    for (int i = 0; i < n; ++i) {
      x(i, t) = GlmTermValue(term, rows.row(i));
      sum += x(i, t);
    }
    term.mean = sum / n;
    double ss = 0;
    for (int i = 0; i < n; ++i) ss += (x(i, t) - term.mean) * (x(i, t) - term.mean);
    term.sd = std::sqrt(ss / n);
    for (int i = 0; i < n; ++i) {
      x(i, t) = term.sd > 0 ? (x(i, t) - term.mean) / term.sd : 0.0;
    }
  }
  const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::VectorXd sample_weight(n);
  for (int i = 0; i < n; ++i) sample_weight[i] = weights.empty() ? 1.0 : weights[i];
  sample_weight *= n / sample_weight.sum();

  ElasticNetOptions options{params.alpha, params.l1_ratio, params.tolerance,
                            params.max_sweeps};
  ElasticNetSolution solution;
  if (!model.logistic) {
    ElasticNetTrace trace;
    solution = SolveElasticNet(x, target, sample_weight, options, nullptr, &trace);
    model.iterations = trace.sweeps;
    model.converged = trace.converged;
  } else {
    // Proximal Newton: repeated weighted least-squares approximations of the
    // penalized logistic likelihood, each solved by the inner CD solver.
    const double ybar = (sample_weight.array() * target.array()).sum() /
                        sample_weight.sum();
    if (ybar <= 0.0 || ybar >= 1.0) {
      return absl::InvalidArgumentError("degenerate binary target: one class");
    }
    solution.beta = Eigen::VectorXd::Zero(p);
    solution.intercept = std::log(ybar / (1 - ybar));
    auto penalized_nll = [&](const ElasticNetSolution& s) {
      const Eigen::VectorXd eta =
          x * s.beta + Eigen::VectorXd::Constant(n, s.intercept);
      double nll = 0;
      for (int i = 0; i < n; ++i) {
        const double e = eta[i];
        // log(1 + exp(e)) - y e, computed stably.
        const double softplus = e > 0 ? e + std::log1p(std::exp(-e))
                                       : std::log1p(std::exp(e));
        nll += sample_weight[i] * (softplus - target[i] * e);
      }
      return nll / n + options.alpha * (options.l1_ratio * s.beta.lpNorm<1>() +
                                        0.5 * (1 - options.l1_ratio) *
                                            s.beta.squaredNorm());
    };
    double objective = penalized_nll(solution);
    bool converged = false;
    int outer = 0;
    while (outer < params.max_outer_iterations) {
      ++outer;
      const Eigen::VectorXd eta =
          x * solution.beta + Eigen::VectorXd::Constant(n, solution.intercept);
      Eigen::VectorXd work_w(n), work_z(n);
      for (int i = 0; i < n; ++i) {
        const double prob = Sigmoid(eta[i]);
        const double curvature = std::max(prob * (1 - prob), 1e-5);
        work_w[i] = sample_weight[i] * curvature;
        work_z[i] = eta[i] + (target[i] - prob) / curvature;
      }
      ElasticNetSolution candidate =
          SolveElasticNet(x, work_z, work_w, options, &solution, nullptr);
      // Backtrack along the Newton direction until the objective decreases.
      double step = 1.0;
      ElasticNetSolution trial = candidate;
      double trial_objective = penalized_nll(trial);
      for (int halving = 0; halving < 30 && trial_objective > objective; ++halving) {
        step *= 0.5;
        trial.beta = solution.beta + step * (candidate.beta - solution.beta);
        trial.intercept =
            solution.intercept + step * (candidate.intercept - solution.intercept);
        trial_objective = penalized_nll(trial);
      }
      if (trial_objective > objective) {
        converged = true;
        break;
      }
      double change = std::abs(trial.intercept - solution.intercept);
      if (p > 0) {
        change = std::max(change,
                          (trial.beta - solution.beta).cwiseAbs().maxCoeff());
      }
      solution = trial;
      objective = trial_objective;
      if (change < params.tolerance) {
        converged = true;
        break;
      }
    }
    model.iterations = outer;
    model.converged = converged;
  }

  model.coefficients.assign(p, 0.0);
  model.intercept = solution.intercept;
  for (int t = 0; t < p; ++t) {
    const GlmTerm& term = model.terms[t];
    if (term.sd <= 0 || solution.beta[t] == 0.0) continue;
    model.coefficients[t] = solution.beta[t] / term.sd;
    model.intercept -= model.coefficients[t] * term.mean;
  }
  return model;
}

}  // namespace workbench
