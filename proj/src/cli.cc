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

#include "workbench/cli.h"

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "workbench/analysis.h"
#include "workbench/experiment.h"
#include "workbench/model_io.h"
#include "workbench/pipeline.h"
#include "workbench/serialize.h"
#include "workbench/service.h"
#include "workbench/status.h"

namespace workbench {
namespace {

struct Globals {
  std::string experiment;
  std::string out;
  std::string format = "json";
  std::optional<uint64_t> seed;
};

struct DataFlags {
  std::string data;
  std::string target;
  std::string task = "regression";
  double test_ratio = kDefaultTestRatio;
  std::optional<uint64_t> prepare_seed;
};

struct AnalysisFlags {
  std::string model;
  std::vector<std::string> models;
  std::string test;
  std::string config;
  std::optional<int> row;
  std::vector<std::string> features;
  std::vector<std::string> slice_features;
  std::optional<int> bins;
  std::optional<int> grid;
  std::optional<int> repeats;
  std::string metric;
  std::optional<double> alpha;
  std::optional<double> threshold;
  std::string protected_feature;
  std::string reference;
  std::string scenario;
  std::vector<std::string> tests;
};

// Failure with its exit code.
struct Outcome {
  int code = kExitOk;
  absl::Status status;
};

Outcome Usage(const absl::Status& s) { return {kExitUsage, s}; }
Outcome DataError(const absl::Status& s) { return {kExitData, s}; }
Outcome Execution(const absl::Status& s) { return {kExitExecution, s}; }

// Analysis failures: bad options are usage errors, the rest execution errors.
Outcome AnalysisFailure(const absl::Status& s) {
  if (absl::IsInvalidArgument(s) || absl::IsNotFound(s)) return Usage(s);
  return Execution(s);
}

void Flatten(const Json& j, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      Flatten(value, prefix.empty() ? key : absl::StrCat(prefix, ".", key), rows);
    }
  } else if (j.is_array()) {
    const bool scalars = std::all_of(j.begin(), j.end(), [](const Json& v) {
      return !v.is_structured();
    });
    if (scalars) {
      std::vector<std::string> cells;
      for (const Json& v : j) cells.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      rows.emplace_back(prefix, absl::StrJoin(cells, ", "));
    } else {
      for (size_t i = 0; i < j.size(); ++i) {
        Flatten(j[i], absl::StrCat(prefix, "[", i, "]"), rows);
      }
    }
  } else {
    rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

std::string Table(const Json& j) {
  std::vector<std::pair<std::string, std::string>> rows;
  Flatten(j, "", rows);
  size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  std::ostringstream os;
  for (const auto& [key, value] : rows) {
    os << std::left << std::setw(static_cast<int>(width) + 2) << key << value << "\n";
  }
  return os.str();
}

Outcome Emit(const Globals& g, const Json& j, std::ostream& out) {
  const std::string text = g.format == "table" ? Table(j) : DumpJson(j);
  if (g.out.empty()) {
    out << text;
    return {};
  }
  if (auto s = WriteFile(g.out, text); !s.ok()) return Execution(s);
  return {};
}

absl::StatusOr<Experiment> FreshExperiment(const Globals& g, const DataFlags& d, bool prepare) {
  Experiment exp(g.seed.value_or(0));
  if (d.target.empty()) return absl::InvalidArgumentError("--target is required with --data");
  RETURN_IF_ERROR(LoadData(exp, d.data, d.target, d.task));
  if (prepare) RETURN_IF_ERROR(PrepareData(exp, d.test_ratio, d.prepare_seed));
  return exp;
}

// Opens the experiment named by the flags: a fresh one when --data is given,
// otherwise the --experiment file.
Outcome Open(const Globals& g, const DataFlags& d, bool prepare, Experiment* exp) {
  if (!d.data.empty()) {
    if (!(d.test_ratio > 0 && d.test_ratio < 1)) {
      return Usage(absl::InvalidArgumentError("--test-ratio must lie in (0, 1)"));
    }
    auto fresh = FreshExperiment(g, d, prepare);
    if (!fresh.ok()) {
      if (absl::IsInvalidArgument(fresh.status()) && d.target.empty()) {
        return Usage(fresh.status());
      }
      return DataError(fresh.status());
    }
    *exp = std::move(*fresh);
    return {};
  }
  if (g.experiment.empty()) {
    return Usage(absl::InvalidArgumentError("pass --data or --experiment"));
  }
  auto loaded = Experiment::Load(g.experiment);
  if (!loaded.ok()) return DataError(loaded.status());
  *exp = std::move(*loaded);
  return {};
}

Outcome Persist(const Globals& g, const Experiment& exp) {
  if (g.experiment.empty()) return {};
  if (auto s = exp.Save(g.experiment); !s.ok()) return Execution(s);
  return {};
}

void AddDataFlags(CLI::App* app, DataFlags& d) {
  app->add_option("--data", d.data, "CSV file (starts a fresh experiment)");
  app->add_option("--target", d.target, "Target column");
  app->add_option("--task", d.task, "regression|binary")
      ->check(CLI::IsMember({"regression", "binary"}));
  app->add_option("--test-ratio", d.test_ratio, "Test fraction for the split");
  app->add_option("--prepare-seed", d.prepare_seed, "Split seed (default: --seed)");
}

void SetIf(Json& c, const char* key, const std::optional<int>& v) {
  if (v) c[key] = *v;
}
void SetIf(Json& c, const char* key, const std::optional<double>& v) {
  if (v) c[key] = *v;
}
void SetIf(Json& c, const char* key, const std::string& v) {
  if (!v.empty()) c[key] = v;
}

bool TakesSeed(std::string_view verb, std::string_view test) {
  if (verb == "compare") return true;
  for (const char* t : {"pfi", "lime", "shap", "reliability", "robustness", "resilience"}) {
    if (test == t) return true;
  }
  return false;
}

// Builds the analysis config: --config JSON overlaid with convenience flags.
absl::StatusOr<Json> BuildConfig(const Globals& g, const AnalysisFlags& a,
                                 std::string_view verb, std::string_view test) {
  Json c = Json::object();
  if (!a.config.empty()) {
    try {
      c = Json::parse(a.config);
    } catch (const Json::parse_error& e) {
      return absl::InvalidArgumentError(absl::StrCat("--config is not valid JSON: ", e.what()));
    }
    if (!c.is_object()) return absl::InvalidArgumentError("--config must be a JSON object");
  }
  if (g.seed && TakesSeed(verb, test)) c["seed"] = *g.seed;
  if (test == "local" || test == "lime" || test == "shap") SetIf(c, "row", a.row);
  if (test == "pdp") {
    if (!a.features.empty()) c["features"] = a.features;
    SetIf(c, "grid", a.grid);
  }
  if (test == "ale") {
    if (!a.features.empty()) c["feature"] = a.features.front();
    SetIf(c, "bins", a.bins);
  }
  if (test == "pfi" || test == "robustness" || test == "resilience") SetIf(c, "metric", a.metric);
  if (test == "pfi" || test == "robustness") SetIf(c, "repeats", a.repeats);
  if (test == "robustness" && !a.features.empty()) c["features"] = a.features;
  if (test == "weakspot" || test == "overfit") {
    if (!a.slice_features.empty()) c["features"] = a.slice_features;
    SetIf(c, "bins", a.bins);
  }
  if (test == "reliability") {
    SetIf(c, "alpha", a.alpha);
    if (!a.slice_features.empty()) {
      Json slice = c.contains("slice") && c["slice"].is_object() ? c["slice"] : Json::object();
      slice["features"] = a.slice_features;
      SetIf(slice, "bins", a.bins);
      c["slice"] = slice;
    }
  }
  if (test == "resilience") SetIf(c, "scenario", a.scenario);
  if (test == "accuracy" || test == "fairness" || verb == "compare") {
    SetIf(c, "threshold", a.threshold);
  }
  if (test == "fairness") {
    SetIf(c, "protected", a.protected_feature);
    SetIf(c, "reference", a.reference);
    if (!a.slice_features.empty()) c["segment_feature"] = a.slice_features.front();
    SetIf(c, "segment_bins", a.bins);
  }
  if (verb == "compare" && !a.tests.empty()) c["tests"] = a.tests;
  return c;
}

Outcome RunAnalysisCommand(const Globals& g, const DataFlags& d, const AnalysisFlags& a,
                           std::string_view verb, std::ostream& out) {
  const std::string test = verb == "compare" ? "compare" : a.test;
  auto config = BuildConfig(g, a, verb, test);
  if (!config.ok()) return Usage(config.status());
  Experiment exp;
  if (Outcome o = Open(g, d, true, &exp); o.code != kExitOk) return o;
  std::vector<std::string> ids;
  if (verb == "compare") {
    ids = a.models;
    if (ids.size() < 2 || ids.size() > 3) {
      return Usage(absl::InvalidArgumentError("--models takes two or three model ids"));
    }
  } else if (!a.model.empty()) {
    ids = {a.model};
  } else if (exp.models().size() == 1) {
    ids = {exp.models().front()->id};
  } else {
    return Usage(absl::InvalidArgumentError(
        exp.models().empty() ? "the experiment has no models" : "--model is required"));
  }
  auto entry = exp.Analyze(ids, verb, test, *config);
  if (!entry.ok()) {
    const ResultEntry failed =
        ErrorEntry(ids, std::string(verb), test, *config, entry.status());
    return AnalysisFailure(absl::Status(entry.status().code(), failed.error));
  }
  exp.AddResult(*entry);
  if (Outcome o = Persist(g, exp); o.code != kExitOk) return o;
  return Emit(g, ResultEntryToJson(*entry), out);
}

void AddAnalysisFlags(CLI::App* app, AnalysisFlags& a, bool compare) {
  if (compare) {
    app->add_option("--models", a.models, "Two or three model ids")->delimiter(',');
    app->add_option("--tests", a.tests, "accuracy, robustness, resilience, reliability")
        ->delimiter(',');
    app->add_option("--threshold", a.threshold, "Classification threshold");
  } else {
    app->add_option("--model", a.model, "Model id (default: the only model)");
  }
  app->add_option("--config", a.config, "Test options as a JSON object");
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interpretable machine-learning workbench", "workbench"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--experiment", g.experiment, "Experiment file");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Write output to this file");
  app.add_option("--format", g.format, "json|table")->check(CLI::IsMember({"json", "table"}));

  DataFlags d;
  AnalysisFlags a;

  CLI::App* data = app.add_subcommand("data", "Load, summarize, check, select, prepare");
  data->require_subcommand(1);
  data->fallthrough();
  std::vector<CLI::App*> data_cmds;
  int top_k = 10;
  for (const char* name : {"load", "summary", "quality", "select", "prepare"}) {
    CLI::App* sub = data->add_subcommand(name);
    AddDataFlags(sub, d);
    if (std::string_view(name) == "select") sub->add_option("--top-k", top_k, "Features to keep");
    data_cmds.push_back(sub);
  }

  CLI::App* train = app.add_subcommand("train", "Train a model");
  AddDataFlags(train, d);
  std::string family;
  std::string model_id;
  std::string params;
  train->add_option("--model", family, "glm|gam|tree|xgb1|xgb2")->required();
  train->add_option("--id", model_id, "Model id");
  train->add_option("--params", params, "Hyperparameters as a JSON object");

  CLI::App* reg = app.add_subcommand("register", "Register a score table as a pseudo model");
  AddDataFlags(reg, d);
  std::string scores;
  reg->add_option("--scores", scores, "CSV with header row_id,score")->required();
  reg->add_option("--id", model_id, "Model id");

  CLI::App* interpret = app.add_subcommand("interpret", "Inherent interpretation");
  AddDataFlags(interpret, d);
  AddAnalysisFlags(interpret, a, false);
  interpret->add_option("--test", a.test, "global|local")
      ->check(CLI::IsMember({"global", "local"}))
      ->default_val("global");
  interpret->add_option("--row", a.row, "Dataset row for local");

  CLI::App* explain = app.add_subcommand("explain", "Post-hoc explanation");
  AddDataFlags(explain, d);
  AddAnalysisFlags(explain, a, false);
  explain->add_option("--method,--test", a.test, "pfi|pdp|ale|lime|shap")
      ->check(CLI::IsMember({"pfi", "pdp", "ale", "lime", "shap"}))
      ->required();
  explain->add_option("--row", a.row, "Dataset row for lime/shap");
  explain->add_option("--feature", a.features, "Feature(s) for pdp/ale");
  explain->add_option("--grid", a.grid, "PDP grid points");
  explain->add_option("--bins", a.bins, "ALE bins");
  explain->add_option("--metric", a.metric, "PFI metric");
  explain->add_option("--repeats", a.repeats, "PFI repeats");

  CLI::App* diagnose = app.add_subcommand("diagnose", "Diagnostic test");
  AddDataFlags(diagnose, d);
  AddAnalysisFlags(diagnose, a, false);
  diagnose->add_option("--test", a.test, "Diagnostic test")
      ->check(CLI::IsMember(KnownTests("diagnose")))
      ->required();
  diagnose->add_option("--slice-feature", a.slice_features, "Slicing feature(s)");
  diagnose->add_option("--bins", a.bins, "Slicing bins");
  diagnose->add_option("--feature", a.features, "Perturbed features (robustness)");
  diagnose->add_option("--metric", a.metric, "Metric");
  diagnose->add_option("--repeats", a.repeats, "Robustness repeats");
  diagnose->add_option("--alpha", a.alpha, "Conformal miscoverage level");
  diagnose->add_option("--threshold", a.threshold, "Classification threshold");
  diagnose->add_option("--protected", a.protected_feature, "Protected feature (fairness)");
  diagnose->add_option("--reference", a.reference, "Reference group (fairness)");
  diagnose->add_option("--scenario", a.scenario, "Resilience scenario");

  CLI::App* compare = app.add_subcommand("compare", "Compare two or three models");
  AddDataFlags(compare, d);
  AddAnalysisFlags(compare, a, true);

  CLI::App* run = app.add_subcommand("run", "Run a pipeline file");
  std::string pipeline;
  run->add_option("pipeline", pipeline, "Pipeline JSON")->required();

  CLI::App* report = app.add_subcommand("report", "Emit the report bundle");
  bool timestamps = false;
  report->add_flag("--timestamps", timestamps, "Include experiment timestamps");

  CLI::App* serve = app.add_subcommand("serve", "Serve the JSON API");
  std::string host = "127.0.0.1";
  int port = 8080;
  int workers = 2;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->add_option("--workers", workers, "Job workers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Outcome outcome;
  if (data->parsed()) {
    CLI::App* sub = nullptr;
    for (CLI::App* c : data_cmds) {
      if (c->parsed()) sub = c;
    }
    const std::string name = sub->get_name();
    Experiment exp;
    outcome = Open(g, d, false, &exp);
    if (outcome.code == kExitOk) {
      if (name == "load") {
        outcome = Persist(g, exp);
        if (outcome.code == kExitOk) {
          outcome = Emit(g, {{"data", exp.data_source()},
                             {"num_rows", exp.dataset().num_rows()},
                             {"content_hash", exp.content_hash()}},
                         out);
        }
      } else if (name == "summary") {
        outcome = Emit(g, ToJson(Summarize(exp.dataset())), out);
      } else if (name == "quality") {
        outcome = Emit(g, ToJson(DataQuality(exp.dataset())), out);
      } else if (name == "select") {
        auto selection = FeatureSelect(exp.dataset(), top_k);
        outcome = selection.ok() ? Emit(g, ToJson(*selection), out)
                                 : Usage(selection.status());
      } else {
        if (!(d.test_ratio > 0 && d.test_ratio < 1)) {
          outcome = Usage(absl::InvalidArgumentError("--test-ratio must lie in (0, 1)"));
        } else if (auto s = PrepareData(exp, d.test_ratio, d.prepare_seed); !s.ok()) {
          outcome = absl::IsFailedPrecondition(s) ? Usage(s) : DataError(s);
        } else {
          outcome = Persist(g, exp);
          if (outcome.code == kExitOk) {
            outcome = Emit(g, {{"data", exp.data_source()}, {"prepared", true}}, out);
          }
        }
      }
    }
  } else if (train->parsed() || reg->parsed()) {
    Json p = Json::object();
    if (train->parsed()) {
      if (auto f = ParseModelFamily(family); !f.ok()) {
        outcome = Usage(f.status());
      } else if (!params.empty()) {
        try {
          p = Json::parse(params);
        } catch (const Json::parse_error& e) {
          outcome = Usage(absl::InvalidArgumentError(
              absl::StrCat("--params is not valid JSON: ", e.what())));
        }
        if (outcome.code == kExitOk && !p.is_object()) {
          outcome = Usage(absl::InvalidArgumentError("--params must be a JSON object"));
        }
      }
      if (outcome.code == kExitOk) {
        auto spec = ModelSpecFromJson(*ParseModelFamily(family), p, "/params");
        if (!spec.ok()) outcome = Usage(spec.status());
      }
    }
    Experiment exp;
    if (outcome.code == kExitOk) outcome = Open(g, d, true, &exp);
    if (outcome.code == kExitOk && !exp.dataset().prepared) {
      if (auto s = PrepareData(exp, d.test_ratio, d.prepare_seed); !s.ok()) outcome = DataError(s);
    }
    if (outcome.code == kExitOk) {
      absl::StatusOr<std::string> id =
          train->parsed() ? TrainModel(exp, family, p, model_id)
                          : RegisterModel(exp, scores, model_id);
      if (!id.ok()) {
        outcome = absl::IsAlreadyExists(id.status()) ? Usage(id.status())
                  : reg->parsed()                     ? DataError(id.status())
                                                      : Execution(id.status());
      } else {
        outcome = Persist(g, exp);
        if (outcome.code == kExitOk) {
          if (g.format == "json" && !g.out.empty()) {
            outcome = Emit(g, DescribeModel(*exp.FindModel(*id)), out);
          } else {
            out << *id << "\n";
          }
        }
      }
    }
  } else if (interpret->parsed()) {
    outcome = RunAnalysisCommand(g, d, a, "interpret", out);
  } else if (explain->parsed()) {
    outcome = RunAnalysisCommand(g, d, a, "explain", out);
  } else if (diagnose->parsed()) {
    outcome = RunAnalysisCommand(g, d, a, "diagnose", out);
  } else if (compare->parsed()) {
    outcome = RunAnalysisCommand(g, d, a, "compare", out);
  } else if (run->parsed()) {
    auto exp = RunPipelineFile(pipeline);
    if (!exp.ok()) {
      const absl::Status& s = exp.status();
      outcome = absl::IsInvalidArgument(s) ? Usage(s)
                : absl::IsNotFound(s)      ? DataError(s)
                                           : Execution(s);
    } else {
      if (!g.experiment.empty()) outcome = Persist(g, *exp);
      if (outcome.code == kExitOk) {
        auto bundle = exp->BuildReport();
        outcome = bundle.ok() ? Emit(g, *bundle, out) : Execution(bundle.status());
      }
    }
  } else if (report->parsed()) {
    Experiment exp;
    outcome = Open(g, DataFlags{}, false, &exp);
    if (outcome.code == kExitOk) {
      ReportOptions options;
      options.include_timestamps = timestamps;
      auto bundle = exp.BuildReport(options);
      if (!bundle.ok()) {
        outcome = Execution(bundle.status());
      } else if (auto s = ValidateReport(*bundle); !s.ok()) {
        outcome = Execution(s);
      } else {
        outcome = Emit(g, *bundle, out);
      }
    }
  } else if (serve->parsed()) {
    Experiment exp(g.seed.value_or(0));
    std::optional<std::string> save;
    if (!g.experiment.empty()) {
      save = g.experiment;
      if (std::filesystem::exists(g.experiment)) {
        auto loaded = Experiment::Load(g.experiment);
        if (!loaded.ok()) {
          outcome = DataError(loaded.status());
        } else {
          exp = std::move(*loaded);
        }
      }
    }
    if (outcome.code == kExitOk) {
      Service service(std::move(exp), save, workers);
      auto s = service.Serve(host, port, [&](int bound) {
        err << "serving on http://" << host << ":" << bound << "\n";
      });
      if (!s.ok()) outcome = Execution(s);
    }
  }

  if (outcome.code != kExitOk) {
    err << "error: " << outcome.status.message() << "\n";
    if (outcome.code == kExitUsage) err << "run with --help for usage\n";
  }
  return outcome.code;
}

}  // namespace workbench
