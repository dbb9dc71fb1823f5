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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "absl/strings/str_format.h"
#include "test_util.h"
#include "workbench/boosting.h"
#include "workbench/diagnose.h"
#include "workbench/experiment.h"
#include "workbench/explain.h"
#include "workbench/glm.h"
#include "workbench/metrics.h"
#include "workbench/model.h"
#include "workbench/parallel.h"
#include "workbench/pipeline.h"
#include "workbench/stats.h"

namespace workbench {
namespace {

using testing::MakeDataset;
using testing::NumericColumn;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TrainedModel Callable(const Dataset& ds, std::function<double(const double*)> f) {
  return *RegisterCallable(
      ds,
      [f](const FeatureMatrix& x) {
        std::vector<double> out(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = f(x.row(i).data());
        return out;
      },
      "callable");
}

std::vector<double> RowOf(const Dataset& ds, int r) {
  const Rows rows = ds.MakeRows(std::vector<int>{r});
  return {rows.row(0).begin(), rows.row(0).end()};
}

// Interventional Shapley values by enumeration of every coalition.
std::vector<double> OracleShapley(const std::function<double(const double*)>& f,
                                  const std::vector<double>& x,
                                  const std::vector<std::vector<double>>& background,
                                  double* base) {
  const int d = static_cast<int>(x.size());
  std::vector<double> value(1 << d, 0.0);
  for (int mask = 0; mask < (1 << d); ++mask) {
    double sum = 0;
    for (const auto& b : background) {
      std::vector<double> z = b;
      for (int j = 0; j < d; ++j) {
        if (mask & (1 << j)) z[j] = x[j];
      }
      sum += f(z.data());
    }
    value[mask] = sum / background.size();
  }
  std::vector<double> fact(d + 1, 1.0);
  for (int k = 1; k <= d; ++k) fact[k] = fact[k - 1] * k;
  std::vector<double> phi(d, 0.0);
  for (int j = 0; j < d; ++j) {
    for (int mask = 0; mask < (1 << d); ++mask) {
      if (mask & (1 << j)) continue;
      const int s = __builtin_popcount(mask);
      phi[j] += fact[s] * fact[d - s - 1] / fact[d] * (value[mask | (1 << j)] - value[mask]);
    }
  }
  *base = value[0];
  return phi;
}

// ---------------------------------------------------------------- criteria

Outcome Purification() {
  const auto start = std::chrono::steady_clock::now();
  double worst_mean = 0, worst_change = 0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    const int n_train = 2000, n = n_train + 500;
    const auto x1 = testing::Uniform(rng, n);
    const auto x2 = testing::Uniform(rng, n);
    const auto x3 = testing::Uniform(rng, n, -3, 3);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = x1[i] * x2[i] + std::sin(x3[i]);
    const Dataset ds = MakeDataset(
        {NumericColumn("x1", x1), NumericColumn("x2", x2), NumericColumn("x3", x3)}, y,
        TaskKind::kRegression, n_train);
    ModelSpec spec = DefaultSpec(ModelFamily::kXgb2);
    spec.seed = seed;
    auto model = Train(ds, spec, "xgb2");
    if (!model.ok()) return {false, model.status().ToString()};
    const BoostedModel& boosted = std::get<Xgb2Model>(model->body).boosted;
    if (!boosted.effects.purified || boosted.effects.pairs.empty()) {
      return {false, "no purified pairwise tables"};
    }
    worst_mean = std::max(worst_mean, MaxWeightedMarginalMean(boosted.effects));
    const Rows rows = ds.MakeRows(ds.RowsIn(SplitRole::kTrain));
    for (int i = 0; i < rows.size(); ++i) {
      worst_change = std::max(
          worst_change, std::abs(boosted.Margin(rows.row(i)) - boosted.TreeMargin(rows.row(i))));
    }
  }
  const double elapsed = Seconds(start);
  return {worst_mean <= 1e-8 && worst_change <= 1e-10 && elapsed < 30,
          absl::StrFormat("max marginal mean %.3g, max prediction change %.3g, %.1f s",
                          worst_mean, worst_change, elapsed)};
}

Outcome ConformalCoverage() {
  const auto start = std::chrono::steady_clock::now();
  double total = 0, lowest = 1;
  int cal = 0, test = 0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const int n_train = 10000, n = n_train + 5000;
    const auto x = testing::Normal(rng, n);
    const auto e = testing::Normal(rng, n);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = x[i] + e[i];
    const Dataset ds = MakeDataset({NumericColumn("x", x)}, y, TaskKind::kRegression, n_train);
    auto model = Train(ds, DefaultSpec(ModelFamily::kGlm), "glm");
    if (!model.ok()) return {false, model.status().ToString()};
    ReliabilityOptions options;
    options.alpha = 0.1;
    options.calibration_ratio = 0.2;
    options.seed = seed;
    auto r = Reliability(*model, ds, options);
    if (!r.ok()) return {false, r.status().ToString()};
    cal = r->calibration_size;
    test = r->test_size;
    total += r->coverage;
    lowest = std::min(lowest, r->coverage);
  }
  const double mean = total / 20;
  const double elapsed = Seconds(start);
  return {cal == 2000 && test == 5000 && mean >= 0.88 && mean <= 0.92 && lowest >= 0.85 &&
              elapsed < 60,
          absl::StrFormat("n_cal %d, n_test %d, mean coverage %.4f, min %.4f, %.1f s", cal,
                          test, mean, lowest, elapsed)};
}

Outcome ExactShap() {
  std::mt19937_64 rng(77);
  const int n = 60;
  std::vector<Column> cols;
  for (int j = 0; j < 4; ++j) {
    cols.push_back(NumericColumn("x" + std::to_string(j), testing::Normal(rng, n)));
  }
  const Dataset ds = MakeDataset(cols, testing::Normal(rng, n), TaskKind::kRegression, 40);
  const int nb = 12;
  FeatureMatrix background(nb, 4);
  std::vector<std::vector<double>> bg(nb, std::vector<double>(4));
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < 4; ++j) background(i, j) = bg[i][j] = ds.columns[j].values[i];
  }
  std::uniform_real_distribution<double> coef(-2, 2);
  double worst_value = 0, worst_efficiency = 0;
  for (int m = 0; m < 10; ++m) {
    const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng), e = coef(rng);
    const auto f = [=](const double* x) {
      return a * std::sin(x[0] * x[1]) + b * x[2] * x[2] * x[3] + c * std::exp(-std::abs(x[0])) +
             d * std::max(x[1], x[3]) + e * std::tanh(x[0] + x[2] * x[3]);
    };
    const TrainedModel model = Callable(ds, f);
    ShapOptions options;
    options.background = background;
    for (const int r : {45, 50, 55}) {
      const auto x = RowOf(ds, r);
      auto shap = Shap(model, ds, x, options);
      if (!shap.ok()) return {false, shap.status().ToString()};
      if (!shap->exact) return {false, "sampled estimator used for d=4"};
      double base = 0;
      const auto phi = OracleShapley(f, x, bg, &base);
      double sum = shap->base;
      for (int j = 0; j < 4; ++j) {
        worst_value = std::max(worst_value, std::abs(shap->values[j] - phi[j]));
        sum += shap->values[j];
      }
      worst_value = std::max(worst_value, std::abs(shap->base - base));
      worst_efficiency = std::max(worst_efficiency, std::abs(sum - f(x.data())));
    }
  }
  return {worst_value <= 1e-10 && worst_efficiency <= 1e-10,
          absl::StrFormat("max |engine - oracle| %.3g, max efficiency gap %.3g", worst_value,
                          worst_efficiency)};
}

Outcome LinearClosedForms() {
  std::mt19937_64 rng(5);
  const int n = 800;
  const auto x0 = testing::Normal(rng, n);
  const auto x1 = testing::Uniform(rng, n, -2, 2);
  const auto x2 = testing::Normal(rng, n);
  const auto x3 = testing::Normal(rng, n, 1, 2);
  const auto noise = testing::Normal(rng, n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = 1.5 * x0[i] - 2 * x1[i] + 0.7 * x3[i] + noise[i];
  const Dataset ds = MakeDataset({NumericColumn("x0", x0), NumericColumn("x1", x1),
                                  NumericColumn("x2", x2), NumericColumn("x3", x3)},
                                 y, TaskKind::kRegression, 600);

  // A callable with an exactly zero coefficient and a lasso GLM.
  const std::vector<double> beta_callable = {1.5, -2.0, 0.0, 0.7};
  const TrainedModel callable = Callable(ds, [beta_callable](const double* x) {
    double s = 0.25;
    for (int j = 0; j < 4; ++j) s += beta_callable[j] * x[j];
    return s;
  });
  ModelSpec spec = DefaultSpec(ModelFamily::kGlm);
  spec.glm.alpha = 0.05;
  auto glm = Train(ds, spec, "lasso");
  if (!glm.ok()) return {false, glm.status().ToString()};
  const std::vector<double> beta_glm = std::get<GlmModel>(glm->body).coefficients;

  FeatureMatrix background(20, 4);
  std::vector<double> bg_mean(4, 0.0);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 4; ++j) {
      background(i, j) = ds.columns[j].values[i];
      bg_mean[j] += background(i, j) / 20;
    }
  }
  double worst = 0;
  double zero_pfi = 0;
  int zero_features = 0;
  const std::vector<std::pair<const TrainedModel*, std::vector<double>>> linear_models = {
      {&callable, beta_callable}, {&*glm, beta_glm}};
  for (const auto& [model, beta] : linear_models) {
    for (int j = 0; j < 4; ++j) {
      const std::string name = ds.columns[j].name;
      auto pdp = Pdp(*model, ds, name, {});
      if (!pdp.ok()) return {false, pdp.status().ToString()};
      for (size_t g = 1; g < pdp->grid.size(); ++g) {
        const double slope =
            (pdp->values[g] - pdp->values[g - 1]) / (pdp->grid[g] - pdp->grid[g - 1]);
        worst = std::max(worst, std::abs(slope - beta[j]));
      }
      auto ale = Ale(*model, ds, name, {});
      if (!ale.ok()) return {false, ale.status().ToString()};
      for (size_t k = 1; k < ale->edges.size(); ++k) {
        const double slope =
            (ale->values[k] - ale->values[k - 1]) / (ale->edges[k] - ale->edges[k - 1]);
        worst = std::max(worst, std::abs(slope - beta[j]));
      }
    }
    ShapOptions options;
    options.background = background;
    const auto x = RowOf(ds, 700);
    auto shap = Shap(*model, ds, x, options);
    if (!shap.ok()) return {false, shap.status().ToString()};
    for (int j = 0; j < 4; ++j) {
      worst = std::max(worst, std::abs(shap->values[j] - beta[j] * (x[j] - bg_mean[j])));
    }
    PfiOptions pfi_options;
    pfi_options.seed = 9;
    auto pfi = Pfi(*model, ds, pfi_options);
    if (!pfi.ok()) return {false, pfi.status().ToString()};
    for (int j = 0; j < 4; ++j) {
      if (beta[j] != 0.0) continue;
      ++zero_features;
      for (const double v : pfi->features[j].degradations) {
        zero_pfi = std::max(zero_pfi, std::abs(v));
      }
    }
  }
  return {worst <= 1e-8 && zero_features >= 2 && zero_pfi == 0.0,
          absl::StrFormat("max slope/SHAP error %.3g, %d zero-coefficient features with max "
                          "|PFI| %.3g",
                          worst, zero_features, zero_pfi)};
}

// Type-7 quantile.
double OracleQuantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * p;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

std::vector<double> OracleCuts(const std::vector<double>& v, SliceBinning binning, int bins) {
  const double lo = *std::min_element(v.begin(), v.end());
  const double hi = *std::max_element(v.begin(), v.end());
  std::vector<double> cuts;
  for (int k = 1; k < bins; ++k) {
    const double c = binning == SliceBinning::kUniform
                         ? lo + (hi - lo) * k / bins
                         : OracleQuantile(v, static_cast<double>(k) / bins);
    if (c > lo && c < hi && (cuts.empty() || c > cuts.back())) cuts.push_back(c);
  }
  return cuts;
}

int OracleBin(const std::vector<double>& cuts, double v) {
  int b = 0;
  while (b < static_cast<int>(cuts.size()) && cuts[b] < v) ++b;
  return b;
}

struct BruteCells {
  std::vector<int> n;
  std::vector<double> loss;
};

BruteCells BruteForce(const Dataset& ds, const TrainedModel& model, SplitRole role,
                      const std::vector<int>& features,
                      const std::vector<std::vector<double>>& cuts) {
  const auto rows = ds.RowsIn(role);
  const auto score = *PredictRows(model, ds, rows);
  int cells = 1;
  for (const auto& c : cuts) cells *= static_cast<int>(c.size()) + 1;
  BruteCells out{std::vector<int>(cells, 0), std::vector<double>(cells, 0.0)};
  for (size_t i = 0; i < rows.size(); ++i) {
    int cell = 0;
    for (size_t a = 0; a < features.size(); ++a) {
      cell = cell * (static_cast<int>(cuts[a].size()) + 1) +
             OracleBin(cuts[a], ds.columns[features[a]].values[rows[i]]);
    }
    const double r = ds.columns.back().values[rows[i]] - score[i];
    out.n[cell] += 1;
    out.loss[cell] += r * r;
  }
  return out;
}

std::vector<double> SplitValues(const Dataset& ds, int feature, SplitRole role) {
  std::vector<double> v;
  for (const int r : ds.RowsIn(role)) v.push_back(ds.columns[feature].values[r]);
  return v;
}

Outcome SlicingOracle() {
  std::mt19937_64 rng(31);
  const int n = 1000;
  const auto x0 = testing::Normal(rng, n);
  const auto x1 = testing::Uniform(rng, n);
  const auto e = testing::Normal(rng, n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = x0[i] + std::sin(3 * x1[i]) + (0.2 + std::abs(x0[i])) * e[i];
  const Dataset ds = MakeDataset({NumericColumn("x0", x0), NumericColumn("x1", x1)}, y,
                                 TaskKind::kRegression, 500);
  auto model = Train(ds, DefaultSpec(ModelFamily::kGlm), "glm");
  if (!model.ok()) return {false, model.status().ToString()};

  int count_mismatch = 0, checked = 0;
  double worst = 0;
  for (const SliceBinning binning : {SliceBinning::kUniform, SliceBinning::kQuantile}) {
    for (const std::vector<int>& features : {std::vector<int>{0}, std::vector<int>{0, 1}}) {
      SliceSpec spec;
      spec.binning = binning;
      spec.bins = 10;
      spec.min_samples = 1;
      for (const int f : features) spec.features.push_back(ds.columns[f].name);

      auto ws = Weakspot(*model, ds, spec);
      if (!ws.ok()) return {false, ws.status().ToString()};
      std::vector<std::vector<double>> cuts;
      for (const int f : features) {
        cuts.push_back(OracleCuts(SplitValues(ds, f, SplitRole::kTest), binning, 10));
      }
      const BruteCells test = BruteForce(ds, *model, SplitRole::kTest, features, cuts);
      if (ws->slices.size() != test.n.size()) return {false, "weakspot cell count differs"};
      for (size_t c = 0; c < test.n.size(); ++c) {
        ++checked;
        count_mismatch += ws->slices[c].n != test.n[c];
        if (test.n[c] > 0) {
          worst = std::max(worst, std::abs(ws->slices[c].metric - test.loss[c] / test.n[c]));
        }
      }

      auto of = OverfitUnderfit(*model, ds, spec);
      if (!of.ok()) return {false, of.status().ToString()};
      cuts.clear();
      for (const int f : features) {
        cuts.push_back(OracleCuts(SplitValues(ds, f, SplitRole::kTrain), binning, 10));
      }
      const BruteCells tr = BruteForce(ds, *model, SplitRole::kTrain, features, cuts);
      const BruteCells te = BruteForce(ds, *model, SplitRole::kTest, features, cuts);
      if (of->slices.size() != tr.n.size()) return {false, "overfit cell count differs"};
      for (size_t c = 0; c < tr.n.size(); ++c) {
        const OverfitCell& cell = of->slices[c];
        ++checked;
        count_mismatch += cell.n_train != tr.n[c] || cell.n_test != te.n[c];
        if (cell.skipped != (tr.n[c] < 1 || te.n[c] < 1)) ++count_mismatch;
        if (!cell.skipped) {
          const double a = tr.loss[c] / tr.n[c], b = te.loss[c] / te.n[c];
          worst = std::max({worst, std::abs(cell.train_metric - a),
                            std::abs(cell.test_metric - b), std::abs(cell.gap - (b - a))});
        }
      }
    }
  }
  return {count_mismatch == 0 && worst <= 1e-12,
          absl::StrFormat("%d cells, %d count mismatches, max metric error %.3g", checked,
                          count_mismatch, worst)};
}

Outcome GlmSolver() {
  std::mt19937_64 rng(8);
  const int n = 500, d = 50;
  Eigen::MatrixXd x(n, d);
  std::normal_distribution<double> normal(0, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = normal(rng);
  for (int j = 0; j < d; ++j) {
    const double mean = x.col(j).mean();
    x.col(j).array() -= mean;
    x.col(j) /= std::sqrt(x.col(j).squaredNorm() / n);
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  beta(0) = 3;
  beta(7) = -2;
  beta(13) = 1.5;
  beta(29) = -1;
  beta(41) = 2.5;
  const Eigen::VectorXd signal = x * beta;
  const double signal_var = (signal.array() - signal.mean()).square().mean();
  const double noise_sd = std::sqrt(signal_var / 10);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z(i) = signal(i) + noise_sd * normal(rng);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);

  const double alpha_max = ElasticNetAlphaMax(x, z, w, 1.0);
  bool monotone = true, converged = true;
  double worst_kkt = 0;
  ElasticNetSolution warm;
  bool have_warm = false;
  for (int k = 1; k <= 30; ++k) {
    ElasticNetOptions options;
    options.alpha = alpha_max * std::pow(0.001, k / 30.0);
    options.tolerance = 1e-10;
    ElasticNetTrace trace;
    const ElasticNetSolution sol =
        SolveElasticNet(x, z, w, options, have_warm ? &warm : nullptr, &trace);
    for (size_t s = 1; s < trace.objective.size(); ++s) {
      if (trace.objective[s] > trace.objective[s - 1] * (1 + 1e-14) + 1e-300) monotone = false;
    }
    converged = converged && trace.converged;
    const Eigen::VectorXd r = z - x * sol.beta - Eigen::VectorXd::Constant(n, sol.intercept);
    for (int j = 0; j < d; ++j) {
      const double g = x.col(j).dot(w.cwiseProduct(r)) / n;
      const double resid = sol.beta(j) != 0.0
                               ? std::abs(g - options.alpha * (sol.beta(j) > 0 ? 1 : -1))
                               : std::max(0.0, std::abs(g) - options.alpha);
      worst_kkt = std::max(worst_kkt, resid);
    }
    worst_kkt = std::max(worst_kkt, std::abs(w.dot(r)) / n);
    warm = sol;
    have_warm = true;
  }
  ElasticNetOptions above;
  above.alpha = alpha_max * 1.0001;
  const ElasticNetSolution zero = SolveElasticNet(x, z, w, above, nullptr, nullptr);
  const bool all_zero = (zero.beta.array() == 0.0).all();
  return {monotone && converged && worst_kkt <= 1e-6 && all_zero,
          absl::StrFormat("30-step path: monotone %s, converged %s, max KKT residual %.3g, "
                          "zero above alpha_max %s",
                          monotone ? "yes" : "no", converged ? "yes" : "no", worst_kkt,
                          all_zero ? "yes" : "no")};
}

Outcome AucOracle() {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int f = 0; f < 50; ++f) {
    const int n = 200;
    std::vector<double> y(n), s(n);
    for (int i = 0; i < n; ++i) {
      y[i] = u(rng) < 0.4 ? 1.0 : 0.0;
      // Coarse scores create ties.
      s[i] = std::round((0.3 * y[i] + u(rng)) * (f % 2 == 0 ? 10 : 1000)) / 10;
    }
    double wins = 0, pairs = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (y[i] != 1.0 || y[j] != 0.0) continue;
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
    }
    const auto auc = RankAuc(y, s);
    if (!auc) return {false, "undefined AUC"};
    worst = std::max(worst, std::abs(*auc - wins / pairs));
  }
  return {worst <= 1e-12, absl::StrFormat("50 fixtures, max |rank - pairwise| %.3g", worst)};
}

Outcome RobustnessCheck() {
  bool identical = true;
  int outside = 0, checks = 0;
  double worst_z = 0;
  const std::vector<double> scales = {0.0, 0.1, 0.2, 0.4};
  std::vector<std::vector<double>> seed_means(scales.size());
  std::mt19937_64 rng(3);
  const int n = 2000;
  const auto x = testing::Normal(rng, n, 0, 1.5);
  const auto e = testing::Normal(rng, n);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = 2 * x[i] + e[i];
  const Dataset ds = MakeDataset({NumericColumn("x", x)}, y, TaskKind::kRegression, 1000);
  auto model = Train(ds, DefaultSpec(ModelFamily::kGlm), "glm");
  if (!model.ok()) return {false, model.status().ToString()};
  const double beta = std::get<GlmModel>(model->body).coefficients[0];
  const double sigma = SampleSd(SplitValues(ds, 0, SplitRole::kTrain));
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    RobustnessOptions options;
    options.scales = scales;
    options.repeats = 10;
    options.seed = seed;
    auto r = Robustness(*model, ds, options);
    if (!r.ok()) return {false, r.status().ToString()};
    for (const double v : r->points[0].values) {
      identical = identical && std::memcmp(&v, &r->baseline, sizeof v) == 0;
    }
    for (size_t k = 1; k < scales.size(); ++k) {
      double sum = 0;
      for (const double v : r->points[k].values) sum += v - r->baseline;
      seed_means[k].push_back(sum / r->points[k].values.size());
    }
  }
  std::string detail;
  for (size_t k = 1; k < scales.size(); ++k) {
    const double expected = beta * beta * scales[k] * scales[k] * sigma * sigma;
    const double mean = Mean(seed_means[k]);
    const double se = SampleSd(seed_means[k]) / std::sqrt(seed_means[k].size());
    const double z = std::abs(mean - expected) / se;
    worst_z = std::max(worst_z, z);
    ++checks;
    outside += z > 3;
    detail += absl::StrFormat("; lambda %.1f: %.4f vs %.4f", scales[k], mean, expected);
  }
  return {identical && outside == 0,
          absl::StrFormat("lambda=0 bit-identical %s, %d/%d scales within 3 SE (max %.2f SE)%s",
                          identical ? "yes" : "no", checks - outside, checks, worst_z, detail)};
}

Outcome Determinism() {
  const std::string dir = testing::TempDir("acceptance");
  const Dataset ds = testing::BinaryFixture(600, 4);
  if (!WriteFile(dir + "/data.csv", testing::ToCsv(ds)).ok()) return {false, "write failed"};
  const Json config = Json::parse(R"({
    "seed": 2024,
    "data": {"path": "data.csv", "target": "y", "task": "binary"},
    "models": [{"id": "glm", "family": "glm"}, {"id": "gam", "family": "gam"},
               {"id": "tree", "family": "tree"}, {"id": "xgb1", "family": "xgb1"},
               {"id": "xgb2", "family": "xgb2"}],
    "tests": [
      {"verb": "interpret", "test": "global", "models": ["xgb2"]},
      {"verb": "interpret", "test": "local", "models": ["tree"], "config": {"row": 4}},
      {"verb": "explain", "test": "pfi", "models": ["gam"]},
      {"verb": "explain", "test": "lime", "models": ["xgb1"], "config": {"row": 8}},
      {"verb": "explain", "test": "shap", "models": ["glm"], "config": {"row": 8}},
      {"verb": "explain", "test": "ale", "models": ["xgb2"], "config": {"feature": "x1"}},
      {"verb": "diagnose", "test": "weakspot", "models": ["gam"], "config": {"features": ["x1", "x2"]}},
      {"verb": "diagnose", "test": "reliability", "models": ["glm"]},
      {"verb": "diagnose", "test": "robustness", "models": ["xgb2"]},
      {"verb": "diagnose", "test": "resilience", "models": ["xgb1"],
       "config": {"scenario": "worst-cluster"}},
      {"verb": "compare", "test": "compare", "models": ["glm", "gam", "xgb2"]}
    ],
    "report": "report.json"
  })");
  const int saved = MaxThreads();
  std::vector<std::string> bundles;
  for (const int threads : {1, 1, 4, 8}) {
    SetMaxThreads(threads);
    auto exp = RunPipeline(config, dir);
    if (!exp.ok()) {
      SetMaxThreads(saved);
      return {false, exp.status().ToString()};
    }
    for (const ResultEntry& e : exp->results()) {
      if (!e.ok) {
        SetMaxThreads(saved);
        return {false, e.verb + "/" + e.test + ": " + e.error};
      }
    }
    bundles.push_back(*ReadFile(dir + "/report.json"));
  }
  SetMaxThreads(saved);
  bool same = true;
  for (const auto& b : bundles) same = same && b == bundles[0];
  return {same, absl::StrFormat("4 runs (threads 1, 1, 4, 8), %d-byte bundles %s",
                                bundles[0].size(), same ? "identical" : "differ")};
}

Outcome FairnessArithmetic() {
  // Score column s; the model returns it. Reference group: 50 of 100 scores at
  // or above 0.5; protected group: 30 of 100.
  std::vector<double> s, y;
  std::vector<int> group;
  for (int copy = 0; copy < 2; ++copy) {
    for (int i = 0; i < 100; ++i) {
      s.push_back((i + 0.5) / 100);
      group.push_back(0);
      s.push_back((i + 0.5) / 100 - 0.2 + (i < 20 ? 0.2 : 0.0));
      group.push_back(1);
    }
  }
  for (size_t i = 0; i < s.size(); ++i) y.push_back((i * 7919) % 10 < 5 ? 1.0 : 0.0);
  const int n = static_cast<int>(s.size());
  Dataset ds = MakeDataset({NumericColumn("s", s),
                            testing::CategoricalColumn("group", group, {"ref", "prot"})},
                           y, TaskKind::kBinary, n / 2);
  const TrainedModel model = Callable(ds, [](const double* x) { return std::clamp(x[0], 0.0, 1.0); });
  FairnessOptions options;
  options.protected_feature = "group";
  options.reference_group = "ref";
  options.min_group_size = 10;
  options.debias_feature = "s";
  auto r = Fairness(model, ds, options);
  if (!r.ok()) return {false, r.status().ToString()};
  const GroupRate* ref = nullptr;
  const GroupRate* prot = nullptr;
  for (const GroupRate& g : r->groups) {
    if (g.group == "ref") ref = &g;
    if (g.group == "prot") prot = &g;
  }
  if (ref == nullptr || prot == nullptr || !prot->air) return {false, "groups missing"};
  bool restored = false;
  double restored_threshold = 0, restored_air = 0, restored_acc = 0;
  for (const DebiasOption& d : r->frontier) {
    if (d.kind == "threshold" && d.air && *d.air >= kFourFifths && d.accuracy) {
      if (!restored || *d.accuracy > restored_acc) {
        restored_threshold = d.threshold;
        restored_air = *d.air;
        restored_acc = *d.accuracy;
      }
      restored = true;
    }
  }
  const bool pass = std::abs(ref->favorable_rate - 0.5) <= 1e-12 &&
                    std::abs(prot->favorable_rate - 0.3) <= 1e-12 &&
                    std::abs(*prot->air - 0.6) <= 1e-12 && prot->flagged && restored;
  return {pass, absl::StrFormat("rates %.3f/%.3f, AIR %.4f, flagged %s; threshold %.4f gives "
                                "AIR %.3f at accuracy %.3f",
                                ref->favorable_rate, prot->favorable_rate, *prot->air,
                                prot->flagged ? "yes" : "no", restored_threshold, restored_air,
                                restored_acc)};
}

}  // namespace
}  // namespace workbench

int main() {
  using workbench::Outcome;
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"purification invariance", workbench::Purification},
      {"conformal coverage", workbench::ConformalCoverage},
      {"exact SHAP oracle", workbench::ExactShap},
      {"linear closed forms", workbench::LinearClosedForms},
      {"slicing oracle", workbench::SlicingOracle},
      {"GLM solver", workbench::GlmSolver},
      {"AUC oracle", workbench::AucOracle},
      {"robustness identity and analytic check", workbench::RobustnessCheck},
      {"determinism", workbench::Determinism},
      {"fairness arithmetic", workbench::FairnessArithmetic},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const Outcome o = run();
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
