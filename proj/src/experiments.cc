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

#include "dperm/experiments.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "dperm/dataset_io.h"
#include "dperm/errors.h"
#include "dperm/noise.h"
#include "dperm/tuning.h"

namespace dperm {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kNoEpsilon = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> Permutation(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.UniformIndex(i)]);
  }
  return order;
}

void ValidateGrid(const ExperimentGrid& grid) {
  if (grid.methods.empty() || grid.losses.empty() || grid.lambdas.empty()) {
    throw PreconditionError("experiment grid has an empty axis");
  }
  const bool any_private =
      std::any_of(grid.methods.begin(), grid.methods.end(),
                  [](Method m) { return m != Method::kNonPrivate; });
  if (any_private && grid.epsilons.empty()) {
    throw PreconditionError("private methods need a nonempty epsilon grid");
  }
  if (grid.repeats < 1) throw PreconditionError("repeats must be >= 1");
  if (grid.workers < 1) throw PreconditionError("workers must be >= 1");
}

// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks not
// started before the deadline are skipped; returns false in that case.
template <typename Task>
bool RunTasks(std::size_t count, int workers, double budget_seconds,
              Task&& task) {
  const auto start = Clock::now();
  std::atomic<std::size_t> next{0};
  std::atomic<bool> skipped{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      if (budget_seconds > 0.0 &&
          std::chrono::duration<double>(Clock::now() - start).count() >
              budget_seconds) {
        skipped = true;
        continue;
      }
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return !skipped;
}

ExperimentRecord MakeRecord(Method method, const LossSpec& loss,
                            double epsilon_p, double lambda, int fold,
                            int repeat, std::size_t n_train,
                            const ErrorCounts& counts, bool converged,
                            double wall_time) {
  ExperimentRecord r;
  r.method = method;
  r.loss = std::string(loss.name());
  r.h = loss.h();
  r.epsilon_p = epsilon_p;
  r.lambda = lambda;
  r.fold = fold;
  r.repeat = repeat;
  r.n_train = n_train;
  r.n_test = counts.examples;
  r.false_positives = counts.false_positives;
  r.false_negatives = counts.false_negatives;
  const double n = std::max<double>(1.0, static_cast<double>(counts.examples));
  r.test_error = counts.error_rate();
  r.false_pos_rate = static_cast<double>(counts.false_positives) / n;
  r.false_neg_rate = static_cast<double>(counts.false_negatives) / n;
  r.converged = converged;
  r.wall_time = wall_time;
  return r;
}

TrainedModel TrainCell(const ExperimentGrid& grid, Method method,
                       const Dataset& train, const LossSpec& loss,
                       double lambda, double epsilon_p, RngStream& rng) {
  SolverOptions solver = grid.solver;
  solver.throw_on_failure = false;
  if (grid.kernel) {
    return TrainKernelPrivate(train, loss, lambda, epsilon_p, *grid.kernel,
                              method, rng, solver);
  }
  return Train(method, train, loss, lambda, epsilon_p, rng, solver);
}

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double ParseDoubleField(const std::string& s) {
  if (s.empty()) return kNoEpsilon;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("results CSV: bad number '" + s + "'");
  }
  return v;
}

bool LessEpsilon(double a, double b) {
  // NaN (non-private) sorts first.
  if (std::isnan(a)) return !std::isnan(b);
  if (std::isnan(b)) return false;
  return a < b;
}

const char* kCsvColumns[] = {
    "schema_version", "method",          "loss",           "h",
    "epsilon_p",      "lambda",          "fold",           "repeat",
    "n_train",        "n_test",          "false_positives", "false_negatives",
    "test_error",     "false_pos_rate",  "false_neg_rate", "converged"};

}  // namespace

Dataset MakeSynthetic(const SyntheticConfig& config) {
  if (config.n == 0 || config.dimension < 1) {
    throw PreconditionError("synthetic data needs n >= 1 and d >= 1");
  }
  if (!(config.positive_fraction >= 0.0 && config.positive_fraction <= 1.0)) {
    throw PreconditionError("positive_fraction must lie in [0, 1]");
  }
  RngStream rng(config.seed);
  const Eigen::VectorXd direction = SampleDirection(config.dimension, rng);
  RowMatrix x(static_cast<Eigen::Index>(config.n), config.dimension);
  Eigen::VectorXd y(static_cast<Eigen::Index>(config.n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y[i] = rng.Uniform() < config.positive_fraction ? 1.0 : -1.0;
    for (int k = 0; k < config.dimension; ++k) {
      x(i, k) = y[i] * config.separation * direction[k] +
                config.noise_std * rng.Normal();
    }
  }
  ScaleToUnitBall(x);
  return Dataset(std::move(x), std::move(y));
}

void ExperimentResult::Sort() {
  std::stable_sort(records.begin(), records.end(),
                   [](const ExperimentRecord& a, const ExperimentRecord& b) {
                     if (a.method != b.method) return a.method < b.method;
                     if (a.loss != b.loss) return a.loss < b.loss;
                     if (a.h != b.h) return a.h < b.h;
                     if (LessEpsilon(a.epsilon_p, b.epsilon_p)) return true;
                     if (LessEpsilon(b.epsilon_p, a.epsilon_p)) return false;
                     return std::tie(a.lambda, a.fold, a.repeat, a.n_train) <
                            std::tie(b.lambda, b.fold, b.repeat, b.n_train);
                   });
}

std::size_t ExpectedRecordCount(const ExperimentGrid& grid) {
  std::size_t total = 0;
  const std::size_t base =
      grid.losses.size() * grid.lambdas.size() * static_cast<std::size_t>(grid.folds);
  for (Method m : grid.methods) {
    total += m == Method::kNonPrivate
                 ? base
                 : base * grid.epsilons.size() *
                       static_cast<std::size_t>(grid.repeats);
  }
  return total;
}

ExperimentResult RunPrivacyAccuracy(const Dataset& data,
                                    const ExperimentGrid& grid) {
  ValidateGrid(grid);
  if (grid.folds < 2) throw PreconditionError("cross-validation needs >= 2 folds");
  if (data.size() < static_cast<std::size_t>(grid.folds)) {
    throw PreconditionError("fewer examples than folds");
  }

  const RngStream root(grid.seed);
  RngStream fold_rng = root.Split(0);
  const std::vector<std::size_t> order = Permutation(data.size(), fold_rng);
  std::vector<Dataset> train_sets, test_sets;
  const std::size_t folds = static_cast<std::size_t>(grid.folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t lo = f * data.size() / folds;
    const std::size_t hi = (f + 1) * data.size() / folds;
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t k = 0; k < order.size(); ++k) {
      (k >= lo && k < hi ? test_idx : train_idx).push_back(order[k]);
    }
    train_sets.push_back(data.Subset(train_idx));
    test_sets.push_back(data.Subset(test_idx));
  }

  struct Cell {
    Method method;
    LossSpec loss;
    double epsilon_p;
    double lambda;
    int fold;
    int repeat;
  };
  std::vector<Cell> cells;
  for (Method method : grid.methods) {
    for (const LossSpec& loss : grid.losses) {
      const bool is_private = method != Method::kNonPrivate;
      const std::vector<double> eps =
          is_private ? grid.epsilons : std::vector<double>{kNoEpsilon};
      const int repeats = is_private ? grid.repeats : 1;
      for (double e : eps) {
        for (double lambda : grid.lambdas) {
          for (int f = 0; f < grid.folds; ++f) {
            for (int r = 0; r < repeats; ++r) {
              cells.push_back(Cell{method, loss, e, lambda, f, r});
            }
          }
        }
      }
    }
  }

  std::vector<std::optional<ExperimentRecord>> slots(cells.size());
  const bool complete = RunTasks(
      cells.size(), grid.workers, grid.time_budget_seconds, [&](std::size_t i) {
        const Cell& c = cells[i];
        RngStream rng = root.Split(i + 1);
        const auto start = Clock::now();
        const TrainedModel model = TrainCell(grid, c.method, train_sets[c.fold],
                                             c.loss, c.lambda, c.epsilon_p, rng);
        const ErrorCounts counts = Evaluate(model, test_sets[c.fold]);
        const double elapsed =
            std::chrono::duration<double>(Clock::now() - start).count();
        slots[i] = MakeRecord(c.method, c.loss, c.epsilon_p, c.lambda, c.fold,
                              c.repeat, train_sets[c.fold].size(), counts,
                              model.converged, elapsed);
      });

  ExperimentResult result;
  result.partial = !complete;
  for (auto& slot : slots) {
    if (slot) result.records.push_back(std::move(*slot));
  }
  result.Sort();
  return result;
}

ExperimentResult RunLearningCurve(const Dataset& data,
                                  const LearningCurveConfig& config) {
  const ExperimentGrid& grid = config.grid;
  ValidateGrid(grid);
  if (config.n_schedule.empty()) throw PreconditionError("empty n schedule");
  const std::size_t largest =
      *std::max_element(config.n_schedule.begin(), config.n_schedule.end());
  const std::size_t needed = largest + config.validation_size + config.test_size;
  if (data.size() < needed || config.test_size == 0) {
    std::ostringstream msg;
    msg << "learning curve needs " << needed << " examples (and a test set), got "
        << data.size();
    throw PreconditionError(msg.str());
  }
  const bool any_nonprivate =
      std::find(grid.methods.begin(), grid.methods.end(), Method::kNonPrivate) !=
      grid.methods.end();
  if (any_nonprivate && config.validation_size == 0) {
    throw PreconditionError("non-private tuning needs a validation set");
  }
  for (std::size_t n : config.n_schedule) {
    if (n < grid.lambdas.size() + 1) {
      throw PreconditionError("training size too small for m + 1 portions");
    }
  }

  const RngStream root(grid.seed);
  struct Split {
    Dataset test, validation, pool;
  };
  std::vector<Split> splits;
  for (int r = 0; r < grid.repeats; ++r) {
    RngStream perm_rng = root.Split(0).Split(static_cast<std::uint64_t>(r));
    const std::vector<std::size_t> order = Permutation(data.size(), perm_rng);
    const std::span<const std::size_t> all(order);
    splits.push_back(Split{
        data.Subset(all.subspan(0, config.test_size)),
        data.Subset(all.subspan(config.test_size, config.validation_size)),
        data.Subset(all.subspan(config.test_size + config.validation_size))});
  }

  struct Cell {
    Method method;
    LossSpec loss;
    double epsilon_p;
    int n_index;
    int repeat;
  };
  std::vector<Cell> cells;
  for (Method method : grid.methods) {
    for (const LossSpec& loss : grid.losses) {
      const bool is_private = method != Method::kNonPrivate;
      const std::vector<double> eps =
          is_private ? grid.epsilons : std::vector<double>{kNoEpsilon};
      for (double e : eps) {
        for (std::size_t k = 0; k < config.n_schedule.size(); ++k) {
          for (int r = 0; r < grid.repeats; ++r) {
            cells.push_back(Cell{method, loss, e, static_cast<int>(k), r});
          }
        }
      }
    }
  }

  std::vector<std::optional<ExperimentRecord>> slots(cells.size());
  const bool complete = RunTasks(
      cells.size(), grid.workers, grid.time_budget_seconds, [&](std::size_t i) {
        const Cell& c = cells[i];
        const Split& split = splits[c.repeat];
        const std::size_t n = config.n_schedule[c.n_index];
        std::vector<std::size_t> head(n);
        std::iota(head.begin(), head.end(), std::size_t{0});
        const Dataset train = split.pool.Subset(head);
        RngStream rng = root.Split(1).Split(i);
        const auto start = Clock::now();

        TrainedModel model;
        if (c.method == Method::kNonPrivate) {
          std::optional<TrainedModel> best;
          std::size_t best_mistakes = 0;
          std::vector<double> lambdas = grid.lambdas;
          std::sort(lambdas.begin(), lambdas.end());
          for (double lambda : lambdas) {
            TrainedModel candidate =
                TrainCell(grid, c.method, train, c.loss, lambda, kNoEpsilon, rng);
            const std::size_t mistakes =
                Evaluate(candidate, split.validation).mistakes();
            if (!best || mistakes < best_mistakes) {
              best = std::move(candidate);
              best_mistakes = mistakes;
            }
          }
          model = std::move(*best);
        } else {
          TuningConfig tuning;
          tuning.lambda_candidates = grid.lambdas;
          tuning.epsilon_p = c.epsilon_p;
          const Method method = c.method;
          const LossSpec loss = c.loss;
          tuning.trainer = [&grid, method, loss](const Dataset& d, double lambda,
                                                 double eps, RngStream& r) {
            return TrainCell(grid, method, d, loss, lambda, eps, r);
          };
          model = Tune(train, tuning, rng);
        }
        const ErrorCounts counts = Evaluate(model, split.test);
        const double elapsed =
            std::chrono::duration<double>(Clock::now() - start).count();
        slots[i] = MakeRecord(c.method, c.loss, c.epsilon_p, model.lambda,
                              c.n_index, c.repeat, n, counts, model.converged,
                              elapsed);
      });

  ExperimentResult result;
  result.partial = !complete;
  for (auto& slot : slots) {
    if (slot) result.records.push_back(std::move(*slot));
  }
  result.Sort();
  return result;
}

ResultFormat ParseResultFormat(std::string_view name) {
  if (name == "csv") return ResultFormat::kCsv;
  if (name == "json") return ResultFormat::kJson;
  throw InvalidArgument("unknown result format '" + std::string(name) + "'");
}

std::string FormatResults(const ExperimentResult& unsorted, ResultFormat format,
                          bool include_timing) {
  ExperimentResult result = unsorted;
  result.Sort();
  if (format == ResultFormat::kJson) {
    json records = json::array();
    for (const ExperimentRecord& r : result.records) {
      json j{{"method", std::string(MethodName(r.method))},
             {"loss", r.loss},
             {"h", r.h},
             {"epsilon_p", std::isnan(r.epsilon_p) ? json(nullptr) : json(r.epsilon_p)},
             {"lambda", r.lambda},
             {"fold", r.fold},
             {"repeat", r.repeat},
             {"n_train", r.n_train},
             {"n_test", r.n_test},
             {"false_positives", r.false_positives},
             {"false_negatives", r.false_negatives},
             {"test_error", r.test_error},
             {"false_pos_rate", r.false_pos_rate},
             {"false_neg_rate", r.false_neg_rate},
             {"converged", r.converged}};
      if (include_timing) j["wall_time"] = r.wall_time;
      records.push_back(std::move(j));
    }
    json doc{{"schema_version", kResultSchemaVersion},
             {"partial", result.partial},
             {"records", std::move(records)}};
    return doc.dump(2) + "\n";
  }

  std::ostringstream out;
  for (std::size_t c = 0; c < std::size(kCsvColumns); ++c) {
    out << (c ? "," : "") << kCsvColumns[c];
  }
  if (include_timing) out << ",wall_time";
  out << '\n';
  for (const ExperimentRecord& r : result.records) {
    out << kResultSchemaVersion << ',' << MethodName(r.method) << ',' << r.loss
        << ',' << FormatDouble(r.h) << ',' << FormatDouble(r.epsilon_p) << ','
        << FormatDouble(r.lambda) << ',' << r.fold << ',' << r.repeat << ','
        << r.n_train << ',' << r.n_test << ',' << r.false_positives << ','
        << r.false_negatives << ',' << FormatDouble(r.test_error) << ','
        << FormatDouble(r.false_pos_rate) << ','
        << FormatDouble(r.false_neg_rate) << ',' << (r.converged ? 1 : 0);
    if (include_timing) out << ',' << FormatDouble(r.wall_time);
    out << '\n';
  }
  if (result.partial) out << "# partial\n";
  return out.str();
}

void EmitResults(const ExperimentResult& result, const std::string& path,
                 ResultFormat format, bool include_timing) {
  if (result.records.empty()) throw PreconditionError("no results to emit");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << FormatResults(result, format, include_timing);
  if (!out) throw IoError("write failed for " + path);
}

ExperimentResult ParseResultsCsv(std::string_view text) {
  ExperimentResult result;
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.find("partial") != std::string::npos) result.partial = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (header.empty()) {
      header = cells;
      if (header.empty() || header[0] != "schema_version") {
        throw ParseError("results CSV: missing schema_version column");
      }
      continue;
    }
    if (cells.size() != header.size()) {
      throw ParseError("results CSV: row has wrong number of fields");
    }
    auto field = [&](std::string_view name) -> const std::string& {
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == name) return cells[c];
      }
      throw ParseError("results CSV: missing column " + std::string(name));
    };
    if (std::stoi(field("schema_version")) != kResultSchemaVersion) {
      throw ParseError("results CSV: unsupported schema version");
    }
    ExperimentRecord r;
    r.method = ParseMethod(field("method"));
    r.loss = field("loss");
    r.h = ParseDoubleField(field("h"));
    r.epsilon_p = ParseDoubleField(field("epsilon_p"));
    r.lambda = ParseDoubleField(field("lambda"));
    r.fold = std::stoi(field("fold"));
    r.repeat = std::stoi(field("repeat"));
    r.n_train = std::stoull(field("n_train"));
    r.n_test = std::stoull(field("n_test"));
    r.false_positives = std::stoull(field("false_positives"));
    r.false_negatives = std::stoull(field("false_negatives"));
    r.test_error = ParseDoubleField(field("test_error"));
    r.false_pos_rate = ParseDoubleField(field("false_pos_rate"));
    r.false_neg_rate = ParseDoubleField(field("false_neg_rate"));
    r.converged = field("converged") == "1";
    if (std::find(header.begin(), header.end(), "wall_time") != header.end()) {
      r.wall_time = ParseDoubleField(field("wall_time"));
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

ExperimentResult LoadResultsCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseResultsCsv(buffer.str());
}

ErrorSummary Summarize(const ExperimentResult& result,
                       const RecordFilter& filter) {
  ErrorSummary s;
  for (const ExperimentRecord& r : result.records) {
    if (filter.method && r.method != *filter.method) continue;
    if (filter.loss && r.loss != *filter.loss) continue;
    if (filter.epsilon_p && r.epsilon_p != *filter.epsilon_p) continue;
    if (filter.lambda && r.lambda != *filter.lambda) continue;
    if (filter.n_train && r.n_train != *filter.n_train) continue;
    ++s.records;
    s.mean_error += r.test_error;
    s.mean_false_pos_rate += r.false_pos_rate;
    s.mean_false_neg_rate += r.false_neg_rate;
  }
  if (s.records > 0) {
    const double n = static_cast<double>(s.records);
    s.mean_error /= n;
    s.mean_false_pos_rate /= n;
    s.mean_false_neg_rate /= n;
  }
  return s;
}

double SpearmanRho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("Spearman correlation needs two equal-length series");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double ConstantNegativeError(const Dataset& data) {
  if (data.empty()) return 0.0;
  return static_cast<double>(data.CountLabel(1.0)) /
         static_cast<double>(data.size());
}

}  // namespace dperm
