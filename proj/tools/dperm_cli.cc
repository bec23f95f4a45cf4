//
// Copyright 2026 The dperm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Command-line front end over the dperm C API.
//
// Exit codes: 0 success, 1 other errors, 2 precondition violation, 3 audit
// failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dperm/dperm.h"

namespace {

using nlohmann::json;

constexpr int kExitError = 1;
constexpr int kExitPrecondition = 2;
constexpr int kExitAuditFailed = 3;

struct Failure {
  int exit_code;
};

void Check(dperm_status status) {
  if (status == DPERM_OK) return;
  std::cerr << "dperm: " << dperm_status_name(status) << ": "
            << dperm_last_error() << "\n";
  throw Failure{status == DPERM_PRECONDITION ? kExitPrecondition : kExitError};
}

// Owns a string returned by the library.
struct OwnedString {
  char* text = nullptr;
  ~OwnedString() { dperm_string_free(text); }
  std::string str() const { return text ? text : ""; }
};

struct DatasetHandle {
  dperm_dataset* ptr = nullptr;
  ~DatasetHandle() { dperm_dataset_free(ptr); }
};

struct ModelHandle {
  dperm_model* ptr = nullptr;
  ~ModelHandle() { dperm_model_free(ptr); }
};

struct ResultHandle {
  dperm_result* ptr = nullptr;
  ~ResultHandle() { dperm_result_free(ptr); }
};

struct DataOptions {
  std::vector<std::string> files;
  std::string schema;
  std::string report;
};

void AddDataOptions(CLI::App* cmd, DataOptions& opts) {
  cmd->add_option("--data", opts.files,
                  "Input files (vector dataset, or raw tables with --schema)")
      ->required();
  cmd->add_option("--schema", opts.schema, "JSON schema for raw delimited tables");
  cmd->add_option("--report", opts.report, "Write the preprocessing report here");
}

void LoadData(const DataOptions& opts, DatasetHandle& out) {
  if (!opts.schema.empty()) {
    std::vector<const char*> paths;
    for (const auto& f : opts.files) paths.push_back(f.c_str());
    OwnedString report;
    Check(dperm_dataset_load_table(paths.data(), paths.size(),
                                   opts.schema.c_str(), &out.ptr, &report.text));
    if (!opts.report.empty()) {
      std::ofstream(opts.report) << report.str() << "\n";
    } else {
      std::cerr << report.str() << "\n";
    }
    return;
  }
  if (opts.files.size() != 1) {
    std::cerr << "dperm: vector datasets take exactly one --data file\n";
    throw Failure{kExitPrecondition};
  }
  Check(dperm_dataset_load(opts.files[0].c_str(), &out.ptr));
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "dperm: cannot write " << path << "\n";
    throw Failure{kExitError};
  }
  out << text;
}

struct ModelOptions {
  std::string method = "objective";
  std::string loss = "logistic";
  double h = 0.5;
  double lambda = 1e-3;
  std::vector<double> lambdas;
  double epsilon = 0.1;
  std::uint64_t seed = 1;
  double kernel_gamma = 0.0;
  int features = 0;
  std::string norm_mode = "rescale_half";
  double grad_tol = 1e-10;
  long max_iters = 100000;
};

void AddModelOptions(CLI::App* cmd, ModelOptions& m) {
  cmd->add_option("--method", m.method, "nonprivate | output | objective")
      ->capture_default_str();
  cmd->add_option("--loss", m.loss, "logistic | huber | smoothed_hinge")
      ->capture_default_str();
  cmd->add_option("--h", m.h, "Smoothing of the Huber / smoothed hinge loss")
      ->capture_default_str();
  cmd->add_option("--epsilon", m.epsilon, "Privacy level epsilon_p")
      ->capture_default_str();
  cmd->add_option("--seed", m.seed, "Random seed")->capture_default_str();
  cmd->add_option("--kernel-gamma", m.kernel_gamma,
                  "Gaussian kernel width; enables random features");
  cmd->add_option("--features-D", m.features, "Number of random features");
  cmd->add_option("--norm-mode", m.norm_mode, "rescale_half | raw")
      ->capture_default_str();
  cmd->add_option("--grad-tol", m.grad_tol, "Relative solver tolerance")
      ->capture_default_str();
  cmd->add_option("--max-iters", m.max_iters, "Solver iteration cap")
      ->capture_default_str();
}

json ModelConfig(const ModelOptions& m) {
  json cfg{{"method", m.method},     {"loss", m.loss},
           {"h", m.h},               {"lambda", m.lambda},
           {"epsilon", m.epsilon},   {"seed", m.seed},
           {"grad_tol", m.grad_tol}, {"max_iters", m.max_iters}};
  if (!m.lambdas.empty()) cfg["lambdas"] = m.lambdas;
  if (m.kernel_gamma > 0.0 || m.features > 0) {
    cfg["kernel"] = {{"gamma", m.kernel_gamma > 0.0 ? m.kernel_gamma : 1.0},
                     {"features", m.features > 0 ? m.features : 500},
                     {"norm_mode", m.norm_mode}};
  }
  return cfg;
}

int RunPrepare(const DataOptions& data, const std::string& out, bool binary) {
  DatasetHandle ds;
  LoadData(data, ds);
  Check(dperm_dataset_save(ds.ptr, out.c_str(), binary ? 1 : 0));
  std::cout << "wrote " << dperm_dataset_size(ds.ptr) << " examples of dimension "
            << dperm_dataset_dimension(ds.ptr) << " to " << out << "\n";
  return 0;
}

int RunTrain(const DataOptions& data, const ModelOptions& m,
             const std::string& out, bool tune) {
  DatasetHandle ds;
  LoadData(data, ds);
  ModelHandle model;
  const std::string cfg = ModelConfig(m).dump();
  Check(tune ? dperm_model_tune(ds.ptr, cfg.c_str(), &model.ptr)
             : dperm_model_train(ds.ptr, cfg.c_str(), &model.ptr));
  OwnedString text;
  Check(dperm_model_to_json(model.ptr, &text.text));
  WriteText(out, text.str() + "\n");
  OwnedString counts;
  Check(dperm_model_evaluate(model.ptr, ds.ptr, &counts.text));
  std::cerr << "training-set error: " << counts.str() << "\n";
  return 0;
}

int RunPredict(const DataOptions& data, const std::string& model_path,
               const std::string& out) {
  ModelHandle model;
  Check(dperm_model_load(model_path.c_str(), &model.ptr));
  DatasetHandle ds;
  LoadData(data, ds);
  if (!out.empty()) {
    std::ostringstream csv;
    csv << "index,label,score,prediction\n";
    const std::size_t d = dperm_dataset_dimension(ds.ptr);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < dperm_dataset_size(ds.ptr); ++i) {
      double label = 0.0, score = 0.0;
      int predicted = 0;
      Check(dperm_dataset_row(ds.ptr, i, row.data(), &label));
      Check(dperm_model_predict(model.ptr, row.data(), d, &score, &predicted));
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", score);
      csv << i << ',' << static_cast<int>(label) << ',' << buf << ','
          << predicted << '\n';
    }
    WriteText(out, csv.str());
  }
  OwnedString counts;
  Check(dperm_model_evaluate(model.ptr, ds.ptr, &counts.text));
  std::cout << counts.str() << "\n";
  return 0;
}

int RunAudit(const std::string& name, std::string config,
             const std::string& config_file, const std::string& out) {
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) {
      std::cerr << "dperm: cannot open " << config_file << "\n";
      return kExitError;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    config = buffer.str();
  }
  OwnedString report;
  int passed = 0;
  Check(dperm_audit_run(name.c_str(), config.c_str(), &report.text, &passed));
  WriteText(out, report.str() + "\n");
  std::cerr << "audit " << name << ": " << (passed ? "PASS" : "FAIL") << "\n";
  return passed ? 0 : kExitAuditFailed;
}

struct ExperimentOptions {
  std::string kind = "privacy-accuracy";
  std::vector<std::string> methods = {"nonprivate", "output", "objective"};
  std::vector<std::string> losses = {"logistic"};
  std::vector<double> epsilons = {0.1};
  std::vector<double> lambdas = {1e-3};
  int folds = 10;
  int repeats = 50;
  int workers = 1;
  double time_budget = 0.0;
  std::vector<std::size_t> n_schedule;
  std::size_t validation_size = 0;
  std::size_t test_size = 0;
  std::string format = "csv";
  bool timing = false;
  std::string summary;
  std::size_t synthetic_n = 0;
  int synthetic_d = 10;
};

int RunExperiment(DataOptions& data, const ModelOptions& m,
                  const ExperimentOptions& e, const std::string& out) {
  DatasetHandle ds;
  if (e.synthetic_n > 0) {
    const std::string cfg =
        json{{"n", e.synthetic_n}, {"dimension", e.synthetic_d}, {"seed", m.seed}}
            .dump();
    Check(dperm_dataset_synthetic(cfg.c_str(), &ds.ptr));
  } else {
    if (data.files.empty()) {
      std::cerr << "dperm: experiment needs --data or --synthetic-n\n";
      return kExitPrecondition;
    }
    LoadData(data, ds);
  }
  json cfg = ModelConfig(m);
  cfg.erase("method");
  cfg.erase("lambda");
  cfg.erase("epsilon");
  cfg.erase("loss");
  cfg.update(json{{"kind", e.kind},
                  {"methods", e.methods},
                  {"losses", e.losses},
                  {"epsilons", e.epsilons},
                  {"lambdas", e.lambdas},
                  {"folds", e.folds},
                  {"repeats", e.repeats},
                  {"workers", e.workers},
                  {"time_budget", e.time_budget},
                  {"n_schedule", e.n_schedule},
                  {"validation_size", e.validation_size},
                  {"test_size", e.test_size}});
  ResultHandle result;
  Check(dperm_experiment_run(ds.ptr, cfg.dump().c_str(), &result.ptr));
  if (out.empty() || out == "-") {
    OwnedString text;
    Check(dperm_result_format(result.ptr, e.format.c_str(), e.timing ? 1 : 0,
                              &text.text));
    std::cout << text.str();
  } else {
    Check(dperm_result_write(result.ptr, out.c_str(), e.format.c_str(),
                             e.timing ? 1 : 0));
  }
  OwnedString summary;
  Check(dperm_result_summary(result.ptr, &summary.text));
  if (!e.summary.empty()) WriteText(e.summary, summary.str() + "\n");
  std::cerr << dperm_result_count(result.ptr) << " records"
            << (dperm_result_partial(result.ptr) ? " (partial: time budget hit)" : "")
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private empirical risk minimization"};
  app.require_subcommand(1);
  // "--h" is the loss smoothing, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(dperm_version()));

  DataOptions data;
  ModelOptions model;
  std::string out;

  auto* prepare = app.add_subcommand("prepare", "Preprocess raw tables into a vector dataset");
  bool binary = false;
  AddDataOptions(prepare, data);
  prepare->add_option("--out", out, "Output dataset path")->required();
  prepare->add_flag("--binary", binary, "Write the binary format");

  auto* train = app.add_subcommand("train", "Train a (private) linear or kernel classifier");
  AddDataOptions(train, data);
  AddModelOptions(train, model);
  train->add_option("--lambda", model.lambda, "Regularization strength")
      ->capture_default_str();
  train->add_option("--out", out, "Model JSON path (stdout by default)");

  auto* tune = app.add_subcommand("tune", "Privately select lambda and train");
  AddDataOptions(tune, data);
  AddModelOptions(tune, model);
  tune->add_option("--lambdas", model.lambdas, "Candidate lambdas")
      ->required()
      ->delimiter(',');
  tune->add_option("--out", out, "Model JSON path (stdout by default)");

  auto* predict = app.add_subcommand("predict", "Score a dataset with a saved model");
  std::string model_path;
  AddDataOptions(predict, data);
  predict->add_option("--model", model_path, "Model JSON")->required();
  predict->add_option("--out", out, "Per-example predictions CSV");

  auto* audit = app.add_subcommand("audit", "Run a statistical audit");
  std::string audit_name, audit_config = "{}", audit_config_file;
  audit->add_option("name", audit_name,
                    "sensitivity | dp-ratio | det-identity | noise-law | gamma-tail")
      ->required();
  audit->add_option("--config", audit_config, "Audit configuration as JSON text");
  audit->add_option("--config-file", audit_config_file, "Audit configuration file");
  audit->add_option("--out", out, "Report path (stdout by default)");

  auto* experiment = app.add_subcommand("experiment", "Run an experiment grid");
  ExperimentOptions exp;
  experiment->add_option("--data", data.files, "Input files");
  experiment->add_option("--schema", data.schema, "Schema for raw tables");
  experiment->add_option("--report", data.report, "Preprocessing report path");
  AddModelOptions(experiment, model);
  experiment->add_option("--kind", exp.kind, "privacy-accuracy | learning-curve")
      ->capture_default_str();
  experiment->add_option("--methods", exp.methods, "Methods")->delimiter(',');
  experiment->add_option("--losses", exp.losses, "Losses")->delimiter(',');
  experiment->add_option("--epsilons", exp.epsilons, "Privacy levels")->delimiter(',');
  experiment->add_option("--lambdas", exp.lambdas, "Regularization grid")->delimiter(',');
  experiment->add_option("--folds", exp.folds, "Cross-validation folds")
      ->capture_default_str();
  experiment->add_option("--repeats", exp.repeats, "Repeats per private cell")
      ->capture_default_str();
  experiment->add_option("--workers", exp.workers, "Worker threads")
      ->capture_default_str();
  experiment->add_option("--time-budget", exp.time_budget,
                         "Seconds before remaining cells are skipped");
  experiment->add_option("--n-schedule", exp.n_schedule, "Training sizes")
      ->delimiter(',');
  experiment->add_option("--validation-size", exp.validation_size,
                         "Held-out validation size (learning curves)");
  experiment->add_option("--test-size", exp.test_size, "Test size (learning curves)");
  experiment->add_option("--format", exp.format, "csv | json")->capture_default_str();
  experiment->add_flag("--timing", exp.timing, "Include wall-clock time per cell");
  experiment->add_option("--summary", exp.summary, "Write a JSON summary here");
  experiment->add_option("--synthetic-n", exp.synthetic_n,
                         "Use a synthetic dataset of this size");
  experiment->add_option("--synthetic-d", exp.synthetic_d, "Synthetic dimension")
      ->capture_default_str();
  experiment->add_option("--out", out, "Results path (stdout by default)");

  for (CLI::App* sub : app.get_subcommands({})) {
    sub->set_help_flag("--help", "Print this help message and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitPrecondition;
  }

  try {
    if (*prepare) return RunPrepare(data, out, binary);
    if (*train) return RunTrain(data, model, out, false);
    if (*tune) return RunTrain(data, model, out, true);
    if (*predict) return RunPredict(data, model_path, out);
    if (*audit) return RunAudit(audit_name, audit_config, audit_config_file, out);
    if (*experiment) return RunExperiment(data, model, exp, out);
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return kExitError;
}
