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

#include "dperm/dperm.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dperm/audit.h"
#include "dperm/dataset.h"
#include "dperm/dataset_io.h"
#include "dperm/erm.h"
#include "dperm/errors.h"
#include "dperm/experiments.h"
#include "dperm/kernel_features.h"
#include "dperm/rng.h"
#include "dperm/tuning.h"

struct dperm_dataset {
  dperm::Dataset data;
};

struct dperm_model {
  dperm::TrainedModel model;
};

struct dperm_result {
  dperm::ExperimentResult result;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

dperm_status ToStatus(dperm::ErrorCode code) {
  switch (code) {
    case dperm::ErrorCode::kInvalidArgument:
      return DPERM_INVALID_ARGUMENT;
    case dperm::ErrorCode::kPrecondition:
      return DPERM_PRECONDITION;
    case dperm::ErrorCode::kNotConverged:
      return DPERM_NOT_CONVERGED;
    case dperm::ErrorCode::kIo:
      return DPERM_IO;
    case dperm::ErrorCode::kParse:
      return DPERM_PARSE;
    case dperm::ErrorCode::kInternal:
      break;
  }
  return DPERM_INTERNAL;
}

template <typename Fn>
dperm_status Guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DPERM_OK;
  } catch (const dperm::Error& e) {
    g_last_error = e.what();
    return ToStatus(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("bad JSON: ") + e.what();
    return DPERM_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DPERM_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DPERM_INTERNAL;
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw dperm::InvalidArgument(what);
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json ParseConfig(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw dperm::ParseError("configuration must be a JSON object");
  return j;
}

dperm::LossSpec LossFrom(const json& j) {
  if (j.is_string()) {
    return dperm::LossSpec::FromName(j.get<std::string>(), dperm::kDefaultSmoothing);
  }
  return dperm::LossSpec::FromName(j.at("kind").get<std::string>(),
                                   j.value("h", dperm::kDefaultSmoothing));
}

dperm::LossSpec LossFromConfig(const json& cfg) {
  return dperm::LossSpec::FromName(cfg.value("loss", std::string("logistic")),
                                   cfg.value("h", dperm::kDefaultSmoothing));
}

dperm::SolverOptions SolverFrom(const json& cfg) {
  dperm::SolverOptions solver;
  solver.grad_tol = cfg.value("grad_tol", solver.grad_tol);
  solver.max_iters = cfg.value("max_iters", solver.max_iters);
  solver.throw_on_failure = cfg.value("throw_on_failure", solver.throw_on_failure);
  return solver;
}

std::optional<dperm::KernelOptions> KernelFrom(const json& cfg) {
  if (!cfg.contains("kernel") || cfg["kernel"].is_null()) return std::nullopt;
  const json& k = cfg["kernel"];
  dperm::KernelOptions kernel;
  kernel.features = k.value("features", kernel.features);
  kernel.gamma = k.value("gamma", kernel.gamma);
  if (k.contains("norm_mode")) {
    kernel.norm_mode = dperm::ParseNormMode(k["norm_mode"].get<std::string>());
  }
  return kernel;
}

dperm::TrainedModel TrainFromConfig(const dperm::Dataset& data, const json& cfg,
                                    double lambda, double epsilon,
                                    dperm::Method method,
                                    dperm::RngStream& rng) {
  const dperm::LossSpec loss = LossFromConfig(cfg);
  const dperm::SolverOptions solver = SolverFrom(cfg);
  if (const auto kernel = KernelFrom(cfg)) {
    return dperm::TrainKernelPrivate(data, loss, lambda, epsilon, *kernel, method,
                                     rng, solver);
  }
  return dperm::Train(method, data, loss, lambda, epsilon, rng, solver);
}

template <typename T>
std::vector<T> ListOr(const json& cfg, const char* key, std::vector<T> fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg[key];
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

}  // namespace

extern "C" {

const char* dperm_version(void) { return "0.1.0"; }

const char* dperm_last_error(void) { return g_last_error.c_str(); }

const char* dperm_status_name(dperm_status status) {
  switch (status) {
    case DPERM_OK:
      return "ok";
    case DPERM_INVALID_ARGUMENT:
      return "invalid argument";
    case DPERM_PRECONDITION:
      return "precondition violated";
    case DPERM_NOT_CONVERGED:
      return "not converged";
    case DPERM_IO:
      return "i/o error";
    case DPERM_PARSE:
      return "parse error";
    case DPERM_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void dperm_string_free(char* s) { std::free(s); }

dperm_status dperm_dataset_load_table(const char* const* paths,
                                      size_t path_count,
                                      const char* schema_path,
                                      dperm_dataset** out,
                                      char** report_json) {
  return Guard([&] {
    Require(paths != nullptr && path_count > 0, "no input files");
    Require(schema_path != nullptr && out != nullptr, "null argument");
    const dperm::TableSchema schema = dperm::LoadSchema(schema_path);
    std::vector<std::string> files;
    for (size_t i = 0; i < path_count; ++i) {
      Require(paths[i] != nullptr, "null path");
      files.emplace_back(paths[i]);
    }
    auto [data, report] = dperm::Preprocess(dperm::LoadTables(files, schema));
    if (report_json != nullptr) *report_json = CopyString(report.ToJson());
    *out = new dperm_dataset{std::move(data)};
  });
}

dperm_status dperm_dataset_load(const char* path, dperm_dataset** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    *out = new dperm_dataset{dperm::LoadDataset(path)};
  });
}

dperm_status dperm_dataset_save(const dperm_dataset* data, const char* path,
                                int binary) {
  return Guard([&] {
    Require(data != nullptr && path != nullptr, "null argument");
    dperm::SaveDataset(data->data, path,
                       binary ? dperm::DatasetFormat::kBinary
                              : dperm::DatasetFormat::kText);
  });
}

dperm_status dperm_dataset_synthetic(const char* config_json,
                                     dperm_dataset** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    const json cfg = ParseConfig(config_json);
    dperm::SyntheticConfig config;
    config.n = cfg.value("n", config.n);
    config.dimension = cfg.value("dimension", config.dimension);
    config.positive_fraction = cfg.value("positive_fraction", config.positive_fraction);
    config.separation = cfg.value("separation", config.separation);
    config.noise_std = cfg.value("noise_std", config.noise_std);
    config.seed = cfg.value("seed", config.seed);
    *out = new dperm_dataset{dperm::MakeSynthetic(config)};
  });
}

dperm_status dperm_dataset_from_arrays(const double* features,
                                       const double* labels, size_t n,
                                       size_t dimension, dperm_dataset** out) {
  return Guard([&] {
    Require(out != nullptr && labels != nullptr, "null argument");
    Require(features != nullptr || n * dimension == 0, "null features");
    Require(dimension > 0, "dimension must be positive");
    dperm::RowMatrix x(static_cast<Eigen::Index>(n),
                       static_cast<Eigen::Index>(dimension));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i) {
      y[static_cast<Eigen::Index>(i)] = labels[i];
      for (size_t k = 0; k < dimension; ++k) {
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            features[i * dimension + k];
      }
    }
    *out = new dperm_dataset{dperm::Dataset(std::move(x), std::move(y))};
  });
}

dperm_status dperm_dataset_split(const dperm_dataset* data,
                                 double train_fraction,
                                 double validation_fraction,
                                 double test_fraction, uint64_t seed,
                                 dperm_dataset** train,
                                 dperm_dataset** validation,
                                 dperm_dataset** test) {
  return Guard([&] {
    Require(data != nullptr && train != nullptr && validation != nullptr &&
                test != nullptr,
            "null argument");
    dperm::RngStream rng(seed);
    auto [a, b, c] = dperm::SplitTrainValTest(
        data->data, {train_fraction, validation_fraction, test_fraction}, rng);
    *train = new dperm_dataset{std::move(a)};
    *validation = new dperm_dataset{std::move(b)};
    *test = new dperm_dataset{std::move(c)};
  });
}

size_t dperm_dataset_size(const dperm_dataset* data) {
  return data == nullptr ? 0 : data->data.size();
}

size_t dperm_dataset_dimension(const dperm_dataset* data) {
  return data == nullptr ? 0 : static_cast<size_t>(data->data.dimension());
}

dperm_status dperm_dataset_row(const dperm_dataset* data, size_t index,
                              double* features, double* label) {
  return Guard([&] {
    Require(data != nullptr && features != nullptr, "null argument");
    if (index >= data->data.size()) throw dperm::InvalidArgument("row index out of range");
    const auto row = data->data.features().row(static_cast<Eigen::Index>(index));
    for (Eigen::Index k = 0; k < row.size(); ++k) features[k] = row[k];
    if (label != nullptr) *label = data->data.labels()[static_cast<Eigen::Index>(index)];
  });
}

void dperm_dataset_free(dperm_dataset* data) { delete data; }

dperm_status dperm_model_train(const dperm_dataset* data,
                               const char* config_json, dperm_model** out) {
  return Guard([&] {
    Require(data != nullptr && out != nullptr, "null argument");
    const json cfg = ParseConfig(config_json);
    const dperm::Method method =
        dperm::ParseMethod(cfg.value("method", std::string("objective")));
    const double lambda = cfg.value("lambda", 1e-3);
    const double epsilon = cfg.value("epsilon", 0.1);
    dperm::RngStream rng(cfg.value("seed", std::uint64_t{1}));
    *out = new dperm_model{
        TrainFromConfig(data->data, cfg, lambda, epsilon, method, rng)};
  });
}

dperm_status dperm_model_tune(const dperm_dataset* data,
                              const char* config_json, dperm_model** out) {
  return Guard([&] {
    Require(data != nullptr && out != nullptr, "null argument");
    const json cfg = ParseConfig(config_json);
    const dperm::Method method =
        dperm::ParseMethod(cfg.value("method", std::string("objective")));
    if (method == dperm::Method::kNonPrivate) {
      throw dperm::InvalidArgument("private tuning needs a private method");
    }
    dperm::TuningConfig tuning;
    tuning.lambda_candidates = ListOr<double>(cfg, "lambdas", {});
    tuning.epsilon_p = cfg.value("epsilon", 0.1);
    tuning.record_scores = cfg.value("record_scores", false);
    tuning.trainer = [cfg, method](const dperm::Dataset& d, double lambda,
                                   double eps, dperm::RngStream& rng) {
      return TrainFromConfig(d, cfg, lambda, eps, method, rng);
    };
    dperm::RngStream rng(cfg.value("seed", std::uint64_t{1}));
    *out = new dperm_model{dperm::Tune(data->data, tuning, rng)};
  });
}

dperm_status dperm_model_to_json(const dperm_model* model, char** text) {
  return Guard([&] {
    Require(model != nullptr && text != nullptr, "null argument");
    *text = CopyString(dperm::ModelToJson(model->model, 2));
  });
}

dperm_status dperm_model_from_json(const char* text, dperm_model** out) {
  return Guard([&] {
    Require(text != nullptr && out != nullptr, "null argument");
    *out = new dperm_model{dperm::ModelFromJson(text)};
  });
}

dperm_status dperm_model_save(const dperm_model* model, const char* path) {
  return Guard([&] {
    Require(model != nullptr && path != nullptr, "null argument");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw dperm::IoError(std::string("cannot write ") + path);
    file << dperm::ModelToJson(model->model, 2) << '\n';
    if (!file) throw dperm::IoError(std::string("write failed for ") + path);
  });
}

dperm_status dperm_model_load(const char* path, dperm_model** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    std::ifstream file(path, std::ios::binary);
    if (!file) throw dperm::IoError(std::string("cannot open ") + path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    *out = new dperm_model{dperm::ModelFromJson(buffer.str())};
  });
}

dperm_status dperm_model_predict(const dperm_model* model, const double* x,
                                 size_t dimension, double* score, int* label) {
  return Guard([&] {
    Require(model != nullptr && x != nullptr, "null argument");
    Eigen::VectorXd point =
        Eigen::Map<const Eigen::VectorXd>(x, static_cast<Eigen::Index>(dimension));
    const dperm::Prediction p = dperm::Predict(model->model, point);
    if (score != nullptr) *score = p.score;
    if (label != nullptr) *label = p.label;
  });
}

dperm_status dperm_model_evaluate(const dperm_model* model,
                                  const dperm_dataset* data,
                                  char** counts_json) {
  return Guard([&] {
    Require(model != nullptr && data != nullptr && counts_json != nullptr,
            "null argument");
    const dperm::ErrorCounts c = dperm::Evaluate(model->model, data->data);
    const json j{{"examples", c.examples},
                 {"false_positives", c.false_positives},
                 {"false_negatives", c.false_negatives},
                 {"error_rate", c.error_rate()}};
    *counts_json = CopyString(j.dump());
  });
}

size_t dperm_model_dimension(const dperm_model* model) {
  if (model == nullptr) return 0;
  if (model->model.feature_map) {
    return static_cast<size_t>(model->model.feature_map->input_dim());
  }
  return static_cast<size_t>(model->model.weights.size());
}

void dperm_model_free(dperm_model* model) { delete model; }

dperm_status dperm_audit_names(char** names_json) {
  return Guard([&] {
    Require(names_json != nullptr, "null argument");
    *names_json = CopyString(json(dperm::AuditNames()).dump());
  });
}

dperm_status dperm_audit_run(const char* name, const char* config_json,
                             char** report_json, int* passed) {
  return Guard([&] {
    Require(name != nullptr, "null audit name");
    const dperm::AuditReport report = dperm::RunNamedAudit(
        name, config_json == nullptr ? std::string_view("{}") : config_json);
    if (report_json != nullptr) *report_json = CopyString(report.ToJson());
    if (passed != nullptr) *passed = report.passed ? 1 : 0;
  });
}

dperm_status dperm_experiment_run(const dperm_dataset* data,
                                  const char* config_json, dperm_result** out) {
  return Guard([&] {
    Require(data != nullptr && out != nullptr, "null argument");
    const json cfg = ParseConfig(config_json);
    dperm::ExperimentGrid grid;
    if (cfg.contains("methods")) {
      grid.methods.clear();
      for (const auto& m : ListOr<std::string>(cfg, "methods", {})) {
        grid.methods.push_back(dperm::ParseMethod(m));
      }
    }
    if (cfg.contains("losses")) {
      grid.losses.clear();
      const json& losses = cfg["losses"];
      const double h = cfg.value("h", dperm::kDefaultSmoothing);
      for (const json& l : losses.is_array() ? losses : json::array({losses})) {
        grid.losses.push_back(l.is_string()
                                  ? dperm::LossSpec::FromName(l.get<std::string>(), h)
                                  : LossFrom(l));
      }
    }
    grid.epsilons = ListOr<double>(cfg, "epsilons", grid.epsilons);
    grid.lambdas = ListOr<double>(cfg, "lambdas", grid.lambdas);
    grid.folds = cfg.value("folds", grid.folds);
    grid.repeats = cfg.value("repeats", grid.repeats);
    grid.seed = cfg.value("seed", grid.seed);
    grid.workers = cfg.value("workers", grid.workers);
    grid.time_budget_seconds = cfg.value("time_budget", grid.time_budget_seconds);
    grid.solver = SolverFrom(cfg);
    grid.kernel = KernelFrom(cfg);

    const std::string kind = cfg.value("kind", std::string("privacy-accuracy"));
    if (kind == "privacy-accuracy") {
      *out = new dperm_result{dperm::RunPrivacyAccuracy(data->data, grid)};
    } else if (kind == "learning-curve") {
      dperm::LearningCurveConfig lc;
      lc.grid = grid;
      lc.n_schedule = ListOr<std::size_t>(cfg, "n_schedule", {});
      lc.validation_size = cfg.value("validation_size", std::size_t{0});
      lc.test_size = cfg.value("test_size", std::size_t{0});
      *out = new dperm_result{dperm::RunLearningCurve(data->data, lc)};
    } else {
      throw dperm::InvalidArgument("unknown experiment kind '" + kind + "'");
    }
  });
}

dperm_status dperm_result_format(const dperm_result* result,
                                 const char* format, int include_timing,
                                 char** text) {
  return Guard([&] {
    Require(result != nullptr && text != nullptr, "null argument");
    *text = CopyString(dperm::FormatResults(
        result->result, dperm::ParseResultFormat(format ? format : "csv"),
        include_timing != 0));
  });
}

dperm_status dperm_result_write(const dperm_result* result, const char* path,
                                const char* format, int include_timing) {
  return Guard([&] {
    Require(result != nullptr && path != nullptr, "null argument");
    dperm::EmitResults(result->result, path,
                       dperm::ParseResultFormat(format ? format : "csv"),
                       include_timing != 0);
  });
}

dperm_status dperm_result_summary(const dperm_result* result,
                                  char** summary_json) {
  return Guard([&] {
    Require(result != nullptr && summary_json != nullptr, "null argument");
    // Key (method, loss, epsilon); epsilon is NaN for non-private rows.
    std::map<std::tuple<int, std::string, double>, std::pair<double, std::size_t>>
        cells;
    for (const auto& r : result->result.records) {
      const double eps = std::isnan(r.epsilon_p) ? -1.0 : r.epsilon_p;
      auto& cell = cells[{static_cast<int>(r.method), r.loss, eps}];
      cell.first += r.test_error;
      ++cell.second;
    }
    json rows = json::array();
    for (const auto& [key, value] : cells) {
      const auto& [method, loss, eps] = key;
      rows.push_back({{"method", std::string(dperm::MethodName(
                                     static_cast<dperm::Method>(method)))},
                      {"loss", loss},
                      {"epsilon_p", eps < 0 ? json(nullptr) : json(eps)},
                      {"records", value.second},
                      {"mean_error", value.first / static_cast<double>(value.second)}});
    }
    *summary_json = CopyString(
        json{{"partial", result->result.partial}, {"cells", rows}}.dump(2));
  });
}

size_t dperm_result_count(const dperm_result* result) {
  return result == nullptr ? 0 : result->result.records.size();
}

int dperm_result_partial(const dperm_result* result) {
  return result != nullptr && result->result.partial ? 1 : 0;
}

void dperm_result_free(dperm_result* result) { delete result; }

}  // extern "C"
