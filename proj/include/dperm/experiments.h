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

#ifndef DPERM_EXPERIMENTS_H_
#define DPERM_EXPERIMENTS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dperm/dataset.h"
#include "dperm/erm.h"
#include "dperm/kernel_features.h"
#include "dperm/losses.h"
#include "dperm/optimizer.h"

namespace dperm {

inline constexpr int kResultSchemaVersion = 1;

// Gaussian class-conditional mixture: x ~ N(y * separation * u, noise_std^2 I)
// for a fixed random unit direction u, then scaled into the unit ball the
// same way real data is preprocessed.
struct SyntheticConfig {
  std::size_t n = 1000;
  int dimension = 10;
  double positive_fraction = 0.25;
  double separation = 1.0;
  double noise_std = 1.0;
  std::uint64_t seed = 1;
};

Dataset MakeSynthetic(const SyntheticConfig& config);

struct ExperimentGrid {
  std::vector<Method> methods = {Method::kNonPrivate, Method::kOutput,
                                 Method::kObjective};
  std::vector<LossSpec> losses = {LossSpec::Logistic()};
  std::vector<double> epsilons = {0.1};
  std::vector<double> lambdas = {1e-3};
  int folds = 10;
  int repeats = 50;
  std::uint64_t seed = 1;
  int workers = 1;
  // Cells not started before the budget runs out are skipped and the result
  // is marked partial. Zero disables the budget.
  double time_budget_seconds = 0.0;
  SolverOptions solver;
  std::optional<KernelOptions> kernel;
};

struct ExperimentRecord {
  Method method = Method::kNonPrivate;
  std::string loss;
  double h = 0.0;
  // NaN for non-private rows.
  double epsilon_p = 0.0;
  double lambda = 0.0;
  int fold = 0;
  int repeat = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  // Error and the two rates are fractions of n_test, so
  // test_error = false_pos_rate + false_neg_rate.
  double test_error = 0.0;
  double false_pos_rate = 0.0;
  double false_neg_rate = 0.0;
  bool converged = true;
  double wall_time = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentRecord> records;
  bool partial = false;

  void Sort();
};

// Number of records a complete run of `grid` produces: non-private cells
// ignore the epsilon grid and run a single repeat.
std::size_t ExpectedRecordCount(const ExperimentGrid& grid);

// k-fold cross-validated error for every (method, loss, eps, lambda) cell.
ExperimentResult RunPrivacyAccuracy(const Dataset& data,
                                    const ExperimentGrid& grid);

struct LearningCurveConfig {
  // methods, losses, epsilons, lambdas (the tuning candidates), repeats
  // (random permutations), seed, workers and solver are taken from here;
  // folds is ignored.
  ExperimentGrid grid;
  std::vector<std::size_t> n_schedule;
  std::size_t validation_size = 0;
  std::size_t test_size = 0;
};

// Error of the tuned classifier against training-set size. Private methods
// are tuned with the exponential mechanism over m + 1 disjoint portions of
// the n training examples; non-private methods compare the candidates on a
// separate validation set (ties go to the smallest lambda). The chosen
// lambda is recorded; `fold` holds the index into n_schedule.
ExperimentResult RunLearningCurve(const Dataset& data,
                                  const LearningCurveConfig& config);

enum class ResultFormat { kCsv, kJson };
ResultFormat ParseResultFormat(std::string_view name);

// Sorted by (method, loss, epsilon_p, lambda, fold, repeat) with a
// schema_version field. Wall time is omitted unless requested so that
// seeded runs produce byte-identical files.
std::string FormatResults(const ExperimentResult& result, ResultFormat format,
                          bool include_timing = false);
void EmitResults(const ExperimentResult& result, const std::string& path,
                 ResultFormat format, bool include_timing = false);
ExperimentResult ParseResultsCsv(std::string_view text);
ExperimentResult LoadResultsCsv(const std::string& path);

// Mean test error (and rates) over records matching the filter.
struct ErrorSummary {
  std::size_t records = 0;
  double mean_error = 0.0;
  double mean_false_pos_rate = 0.0;
  double mean_false_neg_rate = 0.0;
};

struct RecordFilter {
  std::optional<Method> method;
  std::optional<std::string> loss;
  std::optional<double> epsilon_p;
  std::optional<double> lambda;
  std::optional<std::size_t> n_train;
};

ErrorSummary Summarize(const ExperimentResult& result,
                       const RecordFilter& filter);

// Spearman rank correlation (average ranks for ties).
double SpearmanRho(const std::vector<double>& x, const std::vector<double>& y);

// Error of the constant classifier that always predicts -1.
double ConstantNegativeError(const Dataset& data);

}  // namespace dperm

#endif  // DPERM_EXPERIMENTS_H_
