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

// Acceptance suite: one PASS / FAIL / SKIP line per criterion.
// An optional argument restricts the run to criteria whose name contains it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dperm/audit.h"
#include "dperm/dataset_io.h"
#include "dperm/erm.h"
#include "dperm/experiments.h"
#include "dperm/kernel_features.h"
#include "dperm/noise.h"
#include "dperm/random_features.h"
#include "dperm/rng.h"
#include "dperm/tuning.h"
#include "oracles.h"

namespace {

using namespace dperm;
using Clock = std::chrono::steady_clock;

int g_failures = 0;
std::string g_filter;

bool Selected(const std::string& name) {
  return g_filter.empty() || name.find(g_filter) != std::string::npos;
}

void Emit(const std::string& status, const std::string& name, const std::string& detail) {
  std::cout << status << ' ' << name << ": " << detail << std::endl;
  if (status == "FAIL") ++g_failures;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class Detail {
 public:
  Detail() { out_ << std::setprecision(4); }
  template <typename T>
  Detail& operator<<(const T& v) {
    out_ << v;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

const std::vector<LossSpec>& AllLosses() {
  static const std::vector<LossSpec> losses = {LossSpec::Logistic(), LossSpec::Huber(),
                                               LossSpec::SmoothedHinge()};
  return losses;
}

// ---------------------------------------------------------------- Adult

std::optional<Dataset> LoadAdult(std::string* why) {
  const char* env = std::getenv("DPERM_ADULT_DIR");
  const std::string dir = env == nullptr ? "" : env;
  if (dir.empty()) {
    *why = "DPERM_ADULT_DIR not set";
    return std::nullopt;
  }
  const std::string train = dir + "/adult.data", test = dir + "/adult.test";
  if (!std::filesystem::exists(train) || !std::filesystem::exists(test)) {
    *why = "adult.data / adult.test not found in " + dir;
    return std::nullopt;
  }
  const TableSchema schema = LoadSchema(std::string(DPERM_SOURCE_DIR) + "/schemas/adult.json");
  auto [data, report] = Preprocess(LoadTables({train, test}, schema));
  std::cout << "# adult: " << data.size() << " examples, d=" << data.dimension()
            << ", dropped " << report.rows_dropped_missing << " with missing values, "
            << "positive fraction " << ConstantNegativeError(data) << std::endl;
  return std::move(data);
}

void AdultNonPrivate(const Dataset& adult) {
  const std::string name = "adult_nonprivate_logistic_lambda1e-7";
  ExperimentGrid grid;
  grid.methods = {Method::kNonPrivate};
  grid.lambdas = {1e-7};
  grid.folds = 10;
  grid.solver.grad_tol = 1e-6;
  const auto start = Clock::now();
  const ExperimentResult result = RunPrivacyAccuracy(adult, grid);
  const double elapsed = Seconds(start);
  const ErrorSummary s = Summarize(result, {});
  const auto converged = std::count_if(result.records.begin(), result.records.end(),
                                       [](const ExperimentRecord& r) { return r.converged; });
  const bool pass = s.records == 10 && std::abs(s.mean_error - 0.1533) <= 0.02 && elapsed < 600;
  Emit(pass ? "PASS" : "FAIL", name,
       (Detail() << "10-fold error " << s.mean_error << " (target 0.1533 +- 0.02), "
                 << converged << "/10 folds converged, " << elapsed << " s").str());
}

void AdultHuberObjective(const Dataset& adult) {
  const std::string name = "adult_objective_huber_eps0.1";
  ExperimentGrid grid;
  grid.methods = {Method::kObjective};
  grid.losses = {LossSpec::Huber()};
  grid.epsilons = {0.1};
  grid.lambdas = {std::pow(10.0, -2.5)};
  grid.folds = 10;
  grid.repeats = 10;
  grid.solver.grad_tol = 1e-8;
  const auto start = Clock::now();
  const ExperimentResult result = RunPrivacyAccuracy(adult, grid);
  const ErrorSummary s = Summarize(result, {});
  const bool pass = s.records == 100 && std::abs(s.mean_error - 0.2046) <= 0.04;
  Emit(pass ? "PASS" : "FAIL", name,
       (Detail() << "error " << s.mean_error << " over " << s.records
                 << " runs (target 0.2046 +- 0.04), " << Seconds(start) << " s").str());
}

void AdultOutputBaseline(const Dataset& adult) {
  const std::string name = "adult_output_vs_constant_baseline";
  ExperimentGrid grid;
  grid.methods = {Method::kOutput};
  grid.epsilons = {0.1};
  grid.lambdas = {1e-3, std::pow(10.0, -2.5), 1e-2, std::pow(10.0, -1.5), 1e-1};
  grid.folds = 10;
  grid.repeats = 3;
  grid.solver.grad_tol = 1e-8;
  const auto start = Clock::now();
  const ExperimentResult result = RunPrivacyAccuracy(adult, grid);
  double best = 1.0, best_lambda = 0.0;
  for (double lambda : grid.lambdas) {
    const double e = Summarize(result, {.lambda = lambda}).mean_error;
    if (e < best) {
      best = e;
      best_lambda = lambda;
    }
  }
  const double baseline = ConstantNegativeError(adult);
  const bool pass = best >= baseline - 0.02;
  Emit(pass ? "PASS" : "FAIL", name,
       (Detail() << "best error " << best << " at lambda " << best_lambda
                 << ", constant classifier " << baseline << ", " << Seconds(start) << " s")
           .str());
}

// ---------------------------------------------------------------- properties

void Sensitivity() {
  const auto start = Clock::now();
  bool pass = true;
  Detail detail;
  for (const LossSpec& loss : AllLosses()) {
    RngStream rng(101);
    const AuditReport report =
        AuditSensitivity(loss, 0.1, RandomNeighborPairs(200, 20, 3, rng), 1e-12);
    pass = pass && report.passed && report.trials == 200;
    detail << loss.name() << " worst " << report.worst_value << "/" << report.bound << " ("
           << report.violations << " violations); ";
  }
  const double elapsed = Seconds(start);
  pass = pass && elapsed < 60;
  Emit(pass ? "PASS" : "FAIL", "sensitivity_bound", (detail << elapsed << " s").str());
}

void DpRatio() {
  const auto start = Clock::now();
  const double eps = 2.0, lambda = 0.5;
  const NeighborPair pair = ToyNeighborPair();
  DpRatioOptions options;  // 10^5 repeats
  bool pass = true;
  Detail detail;
  for (const LossSpec& loss : AllLosses()) {
    for (Method method : {Method::kOutput, Method::kObjective}) {
      for (double scale : {1.0, 0.25}) {
        const Mechanism mechanism =
            method == Method::kOutput
                ? OutputPerturbationMechanism(loss, lambda, eps, scale)
                : ObjectivePerturbationMechanism(loss, lambda, eps, scale);
        RngStream rng(202);
        const AuditReport r = AuditDpRatio(mechanism, pair, eps, options, rng);
        const bool expected = scale == 1.0 ? (r.passed && !r.low_power) : !r.passed;
        pass = pass && expected;
        detail << MethodName(method) << "/" << loss.name() << (scale == 1.0 ? "" : "/control")
               << " " << (r.passed ? "pass" : "fail") << " " << r.worst_value << "; ";
      }
    }
  }
  const double elapsed = Seconds(start);
  pass = pass && elapsed < 300;
  Emit(pass ? "PASS" : "FAIL", "dp_ratio_toy_eps2", (detail << elapsed << " s").str());
}

void SlackGrid() {
  double worst = 0.0;
  int positive = 0, negative = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = static_cast<std::size_t>(std::pow(10.0, 1 + (i % 5) * 0.8));
    const double lambda = std::pow(10.0, -7 + (i / 5 % 4) * 2.0);
    const double c = std::array<double, 3>{0.25, 1.0, 1.5}[i % 3];
    const double eps = std::pow(10.0, -2 + (i / 20) * 0.6);
    const PrivacyParams p = ComputeSlack(n, lambda, c, eps);
    const oracle::Slack ref = oracle::SlackHighPrecision(static_cast<double>(n), lambda, c, eps);
    worst = std::max(worst, std::abs(p.epsilon_p_prime - ref.epsilon_prime) /
                                std::abs(ref.epsilon_prime));
    if (ref.delta != 0.0) worst = std::max(worst, std::abs(p.delta_reg - ref.delta) / ref.delta);
    ++(ref.delta == 0.0 ? positive : negative);
  }
  const bool pass = worst <= 1e-12 && positive > 0 && negative > 0;
  Emit(pass ? "PASS" : "FAIL", "slack_high_precision",
       (Detail() << "worst relative error " << worst << " on 100 points (" << positive
                 << " without extra ridge, " << negative << " with)").str());
}

void GammaLaw() {
  bool pass = true;
  Detail detail;
  RngStream rng(303);
  const double beta = 1.7;
  const std::size_t samples = 20000;
  for (int d : {2, 5, 20}) {
    std::vector<double> radii(samples);
    for (double& r : radii) r = SampleNoise(NoiseParams{d, beta}, rng).norm();
    const double ks = oracle::KsStatistic(
        radii, [&](double x) { return oracle::GammaCdf(d, 1.0 / beta, x); });
    const double critical = oracle::KsCritical1Percent(samples);
    pass = pass && ks < critical;
    detail << "KS d=" << d << " " << ks << "<" << critical << "; ";
  }
  double worst = 1.0;
  for (int k : {2, 5, 20}) {
    for (double theta : {0.5, 2.0}) {
      for (double delta : {0.1, 0.05, 0.01}) {
        std::size_t below = 0;
        for (std::size_t s = 0; s < samples; ++s) {
          below += SampleNoise(NoiseParams{k, 1.0 / theta}, rng).norm() <
                   k * theta * std::log(k / delta);
        }
        const double slack = static_cast<double>(below) / samples - (1.0 - delta);
        worst = std::min(worst, slack);
      }
    }
  }
  pass = pass && worst >= 0.0;
  Emit(pass ? "PASS" : "FAIL", "gamma_noise_law",
       (detail << "tail bound minimum slack " << worst).str());
}

void DetIdentity() {
  RngStream rng(404);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int dim = 3 + t % 8;
    Eigen::MatrixXd g(dim, dim);
    for (int i = 0; i < g.size(); ++i) g.data()[i] = rng.Normal();
    const Eigen::MatrixXd a = g.transpose() * g + Eigen::MatrixXd::Identity(dim, dim);
    Eigen::VectorXd u(dim), w(dim);
    for (int i = 0; i < dim; ++i) {
      u[i] = rng.Normal();
      w[i] = rng.Normal();
    }
    const Eigen::MatrixXd e =
        (t % 2 ? 1.0 : -0.3) * u * u.transpose() + (t % 3 ? 0.7 : -0.2) * w * w.transpose();
    const long double det_a = oracle::Determinant(a);
    const double lhs =
        static_cast<double>((oracle::Determinant(Eigen::MatrixXd(a + e)) - det_a) / det_a);
    const DetIdentityTerms terms = EvaluateDetIdentity(a, e);
    worst = std::max(worst, std::abs(terms.rhs - lhs) / std::max(std::abs(lhs), 1e-12));
  }
  Emit(worst < 1e-8 ? "PASS" : "FAIL", "determinant_identity",
       (Detail() << "worst relative error " << worst << " over 100 rank-2 perturbations").str());
}

void Kernel() {
  RngStream rng(505);
  const int d = 5;
  const double gamma = 1.0;
  const RandomFeatureMap raw = SampleGaussianFeatures(d, 10000, gamma, rng, NormMode::kRaw);
  double worst = 0.0;
  for (int p = 0; p < 100; ++p) {
    const Dataset pts = RandomUnitBallDataset(2, d, rng);
    const Eigen::VectorXd x = pts.example(0).features, y = pts.example(1).features;
    const double exact = std::exp(-gamma * (x - y).squaredNorm());
    worst = std::max(worst, std::abs(raw.Apply(x).dot(raw.Apply(y)) - exact));
  }
  const RandomFeatureMap half = SampleGaussianFeatures(d, 300, 4.0, rng, NormMode::kRescaleHalf);
  double largest = 0.0;
  for (int p = 0; p < 20000; ++p) {
    Eigen::VectorXd x = SampleDirection(d, rng);
    if (p % 2) x *= rng.Uniform();
    largest = std::max(largest, half.Apply(x).norm());
  }
  const bool pass = worst < 0.05 && largest <= 1.0;
  Emit(pass ? "PASS" : "FAIL", "kernel_random_features",
       (Detail() << "max |<phi(x),phi(y)> - k(x,y)| " << worst
                 << " on 100 pairs at D=10^4; largest rescaled norm " << largest).str());
}

void TuningCriteria() {
  bool fit = true;
  Detail detail;
  RngStream gen(606);
  for (int t = 0; t < 3; ++t) {
    std::vector<std::int64_t> z(5);
    for (auto& v : z) v = static_cast<std::int64_t>(gen.UniformIndex(6));
    const double eps = 0.5 + t;
    std::vector<double> q(z.size());
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      total += q[i] = std::exp(-eps * static_cast<double>(z[i]) / 2.0);
    }
    for (double& v : q) v /= total;
    std::vector<std::size_t> counts(z.size(), 0);
    RngStream rng(700 + t);
    for (int i = 0; i < 100000; ++i) ++counts[SelectExponential(z, eps, rng)];
    const double stat = oracle::ChiSquareStatistic(counts, q);
    const double critical = oracle::ChiSquareQuantile(static_cast<double>(z.size() - 1), 0.99);
    fit = fit && stat < critical;
    detail << "chi2 " << stat << "<" << critical << "; ";
  }

  const Dataset data = MakeSynthetic({.n = 600, .dimension = 5, .seed = 6});
  TuningConfig config;
  config.lambda_candidates = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  config.epsilon_p = 1.0;
  config.record_scores = true;
  config.trainer = [](const Dataset& d, double lambda, double e, RngStream& r) {
    return TrainObjectivePerturbed(d, LossSpec::Logistic(), lambda, e, r);
  };
  const double allowance = 2.0 * std::log(5 / 0.05) / config.epsilon_p;
  int held = 0;
  for (int run = 0; run < 500; ++run) {
    RngStream rng(5000 + run);
    const TrainedModel model = Tune(data, config, rng);
    const auto& z = *model.tuning->scores;
    held += z[model.tuning->chosen_index] <= *std::min_element(z.begin(), z.end()) + allowance;
  }
  const bool pass = fit && held >= 475;
  Emit(pass ? "PASS" : "FAIL", "tuning_exponential_mechanism",
       (detail << "utility bound held in " << held << "/500 runs").str());
}

// ---------------------------------------------------------------- trends

// Private error rises as epsilon or n shrinks; a non-monotone step is
// accepted only when the lower error comes from a classifier that has
// collapsed onto the majority class (almost no false positives).
bool ExplainedByImbalance(const std::vector<ErrorSummary>& by_x) {
  for (std::size_t i = 0; i + 1 < by_x.size(); ++i) {
    if (by_x[i].mean_error < by_x[i + 1].mean_error && by_x[i].mean_false_pos_rate > 0.02) {
      return false;
    }
  }
  return true;
}

void Trends() {
  const auto start = Clock::now();
  const std::vector<double> eps_grid = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  const std::vector<double> lambdas = {1e-3, 1e-2, 1e-1};
  ExperimentResult all;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset data = MakeSynthetic({.n = 5000, .dimension = 10, .seed = seed});
    ExperimentGrid grid;
    grid.methods = {Method::kOutput, Method::kObjective};
    grid.epsilons = eps_grid;
    grid.lambdas = lambdas;
    grid.folds = 5;
    grid.repeats = 3;
    grid.seed = seed;
    grid.solver.grad_tol = 1e-8;
    ExperimentResult r = RunPrivacyAccuracy(data, grid);
    all.records.insert(all.records.end(), r.records.begin(), r.records.end());
  }
  // Best lambda per (method, epsilon), averaged over seeds, folds and repeats.
  auto best = [&](Method m, double eps) {
    ErrorSummary out;
    out.mean_error = 2.0;
    for (double lambda : lambdas) {
      const ErrorSummary s = Summarize(all, {.method = m, .epsilon_p = eps, .lambda = lambda});
      if (s.mean_error < out.mean_error) out = s;
    }
    return out;
  };

  bool objective_wins = true;
  Detail compare;
  for (double eps : {0.05, 0.1}) {
    const double obj = best(Method::kObjective, eps).mean_error;
    const double out = best(Method::kOutput, eps).mean_error;
    objective_wins = objective_wins && obj <= out;
    compare << "eps " << eps << ": objective " << obj << " vs output " << out << "; ";
  }
  Emit(objective_wins ? "PASS" : "FAIL", "trend_objective_beats_output",
       (compare << "5 seeds").str());

  bool eps_ok = true;
  Detail eps_detail;
  for (Method m : {Method::kOutput, Method::kObjective}) {
    std::vector<double> errors;
    std::vector<ErrorSummary> summaries;
    for (double eps : eps_grid) {
      summaries.push_back(best(m, eps));
      errors.push_back(summaries.back().mean_error);
    }
    const double rho = SpearmanRho(eps_grid, errors);
    const bool ok = rho < 0.0 || ExplainedByImbalance(summaries);
    eps_ok = eps_ok && ok;
    eps_detail << MethodName(m) << " rho " << rho << " (errors";
    for (double e : errors) eps_detail << " " << e;
    eps_detail << "); ";
  }

  // Learning curve: tuned private error against the training-set size.
  const std::vector<std::size_t> schedule = {250, 500, 1000, 2000, 4000};
  ExperimentResult curve;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset data = MakeSynthetic({.n = 6000, .dimension = 10, .seed = 100 + seed});
    LearningCurveConfig config;
    config.grid.methods = {Method::kNonPrivate, Method::kOutput, Method::kObjective};
    config.grid.epsilons = {0.1};
    config.grid.lambdas = lambdas;
    config.grid.repeats = 1;
    config.grid.seed = seed;
    config.grid.solver.grad_tol = 1e-8;
    config.n_schedule = schedule;
    config.validation_size = 500;
    config.test_size = 1500;
    ExperimentResult r = RunLearningCurve(data, config);
    curve.records.insert(curve.records.end(), r.records.begin(), r.records.end());
  }
  bool n_ok = true;
  Detail n_detail;
  std::vector<double> sizes(schedule.begin(), schedule.end());
  for (Method m : {Method::kOutput, Method::kObjective, Method::kNonPrivate}) {
    std::vector<double> errors;
    std::vector<ErrorSummary> summaries;
    for (std::size_t n : schedule) {
      summaries.push_back(Summarize(curve, {.method = m, .n_train = n}));
      errors.push_back(summaries.back().mean_error);
    }
    const double rho = SpearmanRho(sizes, errors);
    if (m != Method::kNonPrivate) {
      n_ok = n_ok && (rho < 0.0 || ExplainedByImbalance(summaries));
    }
    n_detail << MethodName(m) << " rho " << rho << " (errors";
    for (double e : errors) n_detail << " " << e;
    n_detail << "); ";
  }
  Emit(eps_ok && n_ok ? "PASS" : "FAIL", "trend_error_decreasing",
       (Detail() << "in epsilon: " << eps_detail.str() << "in n: " << n_detail.str()
                 << Seconds(start) << " s").str());
}

void GradientChecks() {
  RngStream rng(808);
  double worst = 0.0;
  int combos = 0;
  const Dataset base = RandomUnitBallDataset(60, 4, rng);
  const RandomFeatureMap map = SampleGaussianFeatures(4, 30, 2.0, rng);
  const Dataset mapped = map.Apply(base);
  for (double h : {0.1, 0.5}) {
    for (const LossSpec& loss : {LossSpec::Logistic(), LossSpec::Huber(h), LossSpec::SmoothedHinge(h)}) {
      for (int variant = 0; variant < 4; ++variant) {
        const Dataset& data = variant == 3 ? mapped : base;
        Eigen::VectorXd linear;
        double ridge = 0.0;
        if (variant == 1 || variant == 3) linear = SampleNoise(NoiseParams{data.dimension(), 5.0}, rng);
        if (variant == 2) ridge = 0.03;
        const ErmObjective objective(data, loss, 0.01, linear, ridge);
        for (int p = 0; p < 20; ++p) {
          Eigen::VectorXd point(data.dimension());
          for (int i = 0; i < point.size(); ++i) point[i] = 3.0 * rng.Normal();
          const Eigen::VectorXd g = objective.Gradient(point);
          Eigen::VectorXd fd(point.size());
          const double step = 1e-6;
          for (int i = 0; i < point.size(); ++i) {
            Eigen::VectorXd hi = point, lo = point;
            hi[i] += step;
            lo[i] -= step;
            fd[i] = (objective.Value(hi) - objective.Value(lo)) / (2 * step);
          }
          worst = std::max(worst, (g - fd).norm() / std::max(1.0, g.norm()));
        }
        ++combos;
      }
    }
  }
  Emit(worst < 1e-5 ? "PASS" : "FAIL", "gradient_checks",
       (Detail() << "worst relative gap " << worst << " over " << combos
                 << " loss/objective combinations").str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_filter = argv[1];
  struct Criterion {
    std::string name;
    void (*run)();
  };
  const std::vector<Criterion> properties = {
      {"sensitivity_bound", Sensitivity},
      {"dp_ratio_toy_eps2", DpRatio},
      {"slack_high_precision", SlackGrid},
      {"gamma_noise_law", GammaLaw},
      {"determinant_identity", DetIdentity},
      {"kernel_random_features", Kernel},
      {"tuning_exponential_mechanism", TuningCriteria},
      {"trend_", Trends},
      {"gradient_checks", GradientChecks},
  };
  for (const Criterion& c : properties) {
    if (!Selected(c.name)) continue;
    try {
      c.run();
    } catch (const std::exception& e) {
      Emit("FAIL", c.name, std::string("exception: ") + e.what());
    }
  }

  const std::vector<std::pair<std::string, void (*)(const Dataset&)>> adult_criteria = {
      {"adult_nonprivate_logistic_lambda1e-7", AdultNonPrivate},
      {"adult_objective_huber_eps0.1", AdultHuberObjective},
      {"adult_output_vs_constant_baseline", AdultOutputBaseline},
  };
  bool any_adult = false;
  for (const auto& [name, run] : adult_criteria) any_adult |= Selected(name);
  if (any_adult) {
    std::string why;
    std::optional<Dataset> adult;
    try {
      adult = LoadAdult(&why);
    } catch (const std::exception& e) {
      why = std::string("loading failed: ") + e.what();
    }
    for (const auto& [name, run] : adult_criteria) {
      if (!Selected(name)) continue;
      if (!adult) {
        Emit("SKIP", name, why);
        continue;
      }
      try {
        run(*adult);
      } catch (const std::exception& e) {
        Emit("FAIL", name, std::string("exception: ") + e.what());
      }
    }
  }
  std::cout << (g_failures == 0 ? "acceptance: all criteria passed or skipped"
                                : "acceptance: " + std::to_string(g_failures) + " failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
