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

#include "dperm/audit.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "dperm/errors.h"
#include "dperm/noise.h"

namespace dperm {
namespace {

using nlohmann::json;

// Asymptotic Kolmogorov-Smirnov coefficient at the 1% level,
// sqrt(-log(0.005) / 2).
constexpr double kKsCoefficient1Pct = 1.6276236115189502;

bool SameExample(const Dataset& a, const Dataset& b, std::size_t i) {
  const auto r = static_cast<Eigen::Index>(i);
  return a.labels()[r] == b.labels()[r] &&
         a.features().row(r) == b.features().row(r);
}

bool SameData(const Dataset& a, const Dataset& b) {
  return a.size() == b.size() && a.dimension() == b.dimension() &&
         a.labels() == b.labels() && a.features() == b.features();
}

// Minimizer of the unperturbed objective, memoized per dataset. Audits call a
// mechanism many times on the same two datasets.
class MinimizerCache {
 public:
  MinimizerCache(LossSpec loss, double lambda, SolverOptions solver)
      : loss_(loss), lambda_(lambda), solver_(solver) {}

  const Eigen::VectorXd& Get(const Dataset& data) {
    for (const auto& [cached, minimizer] : entries_) {
      if (SameData(cached, data)) return minimizer;
    }
    if (entries_.size() >= 4) entries_.erase(entries_.begin());
    entries_.emplace_back(data,
                          TrainNonPrivate(data, loss_, lambda_, solver_).weights);
    return entries_.back().second;
  }

 private:
  LossSpec loss_;
  double lambda_;
  SolverOptions solver_;
  std::vector<std::pair<Dataset, Eigen::VectorXd>> entries_;
};

double Quantile(std::vector<double> values, double p) {
  const auto k = static_cast<std::size_t>(
      std::clamp(p * static_cast<double>(values.size() - 1), 0.0,
                 static_cast<double>(values.size() - 1)));
  std::nth_element(values.begin(), values.begin() + static_cast<long>(k),
                   values.end());
  return values[k];
}

struct Axis {
  double lo = 0.0;
  double width = 1.0;
  int bins = 1;

  // -1 when outside the histogram range.
  int Bin(double v) const {
    const double pos = (v - lo) / width;
    if (!(pos >= 0.0) || pos >= bins) return -1;
    return std::min(static_cast<int>(pos), bins - 1);
  }
};

Axis MakeAxis(const std::vector<double>& base, const std::vector<double>& variant,
              int bins, double min_half_width) {
  std::vector<double> pooled = base;
  pooled.insert(pooled.end(), variant.begin(), variant.end());
  const double center = 0.5 * (Quantile(base, 0.5) + Quantile(variant, 0.5));
  double half = std::max({std::abs(Quantile(pooled, 0.005) - center),
                          std::abs(Quantile(pooled, 0.995) - center),
                          min_half_width});
  if (!(half > 0.0)) half = 1e-12;
  Axis axis;
  axis.bins = bins;
  axis.width = 2.0 * half / bins;
  // Keep the center in the middle of a bin rather than on an edge.
  axis.lo = center - half + (bins % 2 == 0 ? 0.5 * axis.width : 0.0);
  return axis;
}

AuditReport NewReport(std::string name) {
  AuditReport report;
  report.name = std::move(name);
  report.notes.emplace_back(kAuditDisclaimer);
  return report;
}

}  // namespace

NeighborPair MakeNeighborPair(const Dataset& data, std::size_t index,
                              const Example& replacement) {
  if (index >= data.size()) {
    throw PreconditionError("neighbor index out of range");
  }
  NeighborPair pair{data, data.WithReplaced(index, replacement), index};
  if (SameExample(pair.base, pair.variant, index)) {
    throw PreconditionError(
        "neighboring datasets must differ in exactly one example; the "
        "replacement equals the original");
  }
  return pair;
}

void ValidateNeighborPair(const NeighborPair& pair) {
  if (pair.base.size() != pair.variant.size() ||
      pair.base.dimension() != pair.variant.dimension()) {
    throw PreconditionError("neighboring datasets must have the same shape");
  }
  std::size_t differing = 0;
  std::size_t where = 0;
  for (std::size_t i = 0; i < pair.base.size(); ++i) {
    if (!SameExample(pair.base, pair.variant, i)) {
      ++differing;
      where = i;
    }
  }
  if (differing != 1 || where != pair.changed_index) {
    std::ostringstream msg;
    msg << "neighboring datasets must differ in exactly one example at index "
        << pair.changed_index << "; found " << differing << " differences";
    throw PreconditionError(msg.str());
  }
}

NeighborPair ToyNeighborPair() {
  std::vector<Example> examples;
  const double xs[] = {0.8, -0.6, 0.4, -0.2, 1.0};
  const double ys[] = {1.0, -1.0, 1.0, -1.0, 1.0};
  for (int i = 0; i < 5; ++i) {
    examples.push_back(Example{Eigen::VectorXd::Constant(1, xs[i]), ys[i]});
  }
  const Dataset base = Dataset::FromExamples(examples, 1);
  return MakeNeighborPair(base, 4, Example{Eigen::VectorXd::Constant(1, -1.0), 1.0});
}

Dataset RandomUnitBallDataset(std::size_t n, int d, RngStream& rng) {
  std::vector<Example> examples;
  examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double radius = std::pow(rng.Uniform(), 1.0 / d);
    examples.push_back(Example{radius * SampleDirection(d, rng),
                               rng.Uniform() < 0.5 ? -1.0 : 1.0});
  }
  return Dataset::FromExamples(examples, d);
}

std::vector<NeighborPair> RandomNeighborPairs(std::size_t count, std::size_t n,
                                              int d, RngStream& rng) {
  std::vector<NeighborPair> pairs;
  pairs.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Dataset base = RandomUnitBallDataset(n, d, rng);
    const std::size_t index = rng.UniformIndex(n);
    const Dataset replacement = RandomUnitBallDataset(1, d, rng);
    pairs.push_back(MakeNeighborPair(base, index, replacement.example(0)));
  }
  return pairs;
}

std::string AuditReport::ToJson(int indent) const {
  json j{{"name", name},
         {"trials", trials},
         {"worst_value", worst_value},
         {"bound", bound},
         {"worst_slack", worst_slack},
         {"violations", violations},
         {"passed", passed},
         {"low_power", low_power},
         {"solver_tol", solver_tol},
         {"notes", notes}};
  return j.dump(indent);
}

AuditReport AuditSensitivity(const LossSpec& loss, double lambda,
                             const std::vector<NeighborPair>& pairs,
                             double grad_tol) {
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  SolverOptions solver;
  solver.grad_tol = grad_tol;
  solver.relative_tolerance = false;

  AuditReport report = NewReport("sensitivity");
  report.solver_tol = grad_tol;
  report.worst_slack = std::numeric_limits<double>::infinity();
  double worst_ratio = -1.0;
  for (const NeighborPair& pair : pairs) {
    ValidateNeighborPair(pair);
    const double n = static_cast<double>(pair.base.size());
    const double bound = 2.0 / (n * lambda) + 2.0 * grad_tol / lambda;
    const Eigen::VectorXd f = TrainNonPrivate(pair.base, loss, lambda, solver).weights;
    const Eigen::VectorXd g =
        TrainNonPrivate(pair.variant, loss, lambda, solver).weights;
    const double change = (f - g).norm();
    if (change > bound) ++report.violations;
    if (change / bound > worst_ratio) {
      worst_ratio = change / bound;
      report.worst_value = change;
      report.bound = bound;
    }
    report.worst_slack = std::min(report.worst_slack, bound - change);
    ++report.trials;
  }
  report.passed = report.violations == 0 && report.trials > 0;
  std::ostringstream note;
  note << "loss=" << loss.name() << " lambda=" << lambda
       << "; bound 2/(n lambda) + 2 grad_tol/lambda";
  report.notes.push_back(note.str());
  return report;
}

Mechanism OutputPerturbationMechanism(const LossSpec& loss, double lambda,
                                      double epsilon_p, double noise_scale,
                                      const SolverOptions& solver) {
  auto cache = std::make_shared<MinimizerCache>(loss, lambda, solver);
  return [=](const Dataset& data, RngStream& rng) -> Eigen::VectorXd {
    const Eigen::VectorXd& minimizer = cache->Get(data);
    const NoiseParams noise{
        data.dimension(),
        static_cast<double>(data.size()) * lambda * epsilon_p / 2.0};
    return minimizer + noise_scale * SampleNoise(noise, rng);
  };
}

Mechanism ObjectivePerturbationMechanism(const LossSpec& loss, double lambda,
                                         double epsilon_p, double noise_scale,
                                         const SolverOptions& solver) {
  return [=](const Dataset& data, RngStream& rng) -> Eigen::VectorXd {
    const PrivacyParams privacy =
        ComputeSlack(data.size(), lambda, loss.curvature_bound(), epsilon_p);
    const Eigen::VectorXd b =
        noise_scale *
        SampleNoise(NoiseParams{data.dimension(), privacy.beta}, rng);
    return ObjectivePerturbedWithNoise(data, loss, lambda, privacy, b, solver)
        .weights;
  };
}

AuditReport AuditDpRatio(const Mechanism& mechanism, const NeighborPair& pair,
                         double epsilon_p, const DpRatioOptions& options,
                         RngStream& rng) {
  ValidateNeighborPair(pair);
  if (options.repeats < 10000) {
    throw PreconditionError("DP ratio audit needs at least 10^4 repeats");
  }
  if (options.bins < 1) throw InvalidArgument("need at least one bin");

  // Outputs per dataset, stored per axis.
  std::vector<std::vector<double>> base_out, variant_out;
  RngStream base_rng = rng.Split(0);
  RngStream variant_rng = rng.Split(1);
  int dims = 0;
  for (std::size_t r = 0; r < options.repeats; ++r) {
    const Eigen::VectorXd a = mechanism(pair.base, base_rng);
    const Eigen::VectorXd b = mechanism(pair.variant, variant_rng);
    if (r == 0) {
      dims = static_cast<int>(a.size());
      if (dims < 1 || dims > 2 || b.size() != a.size()) {
        throw InvalidArgument("DP ratio audit supports 1- or 2-D outputs only");
      }
      base_out.assign(dims, {});
      variant_out.assign(dims, {});
      for (int k = 0; k < dims; ++k) {
        base_out[k].reserve(options.repeats);
        variant_out[k].reserve(options.repeats);
      }
    }
    for (int k = 0; k < dims; ++k) {
      base_out[k].push_back(a[k]);
      variant_out[k].push_back(b[k]);
    }
  }

  std::vector<Axis> axes;
  for (int k = 0; k < dims; ++k) {
    axes.push_back(MakeAxis(base_out[k], variant_out[k], options.bins,
                            options.min_half_width));
  }
  const std::size_t cells =
      dims == 1 ? options.bins
                : static_cast<std::size_t>(options.bins) * options.bins;
  std::vector<std::size_t> base_count(cells, 0), variant_count(cells, 0);
  auto bin_of = [&](const std::vector<std::vector<double>>& out,
                    std::size_t r) -> long {
    long index = 0;
    for (int k = 0; k < dims; ++k) {
      const int b = axes[k].Bin(out[k][r]);
      if (b < 0) return -1;
      index = index * options.bins + b;
    }
    return index;
  };
  for (std::size_t r = 0; r < options.repeats; ++r) {
    if (const long b = bin_of(base_out, r); b >= 0) ++base_count[b];
    if (const long b = bin_of(variant_out, r); b >= 0) ++variant_count[b];
  }

  AuditReport report = NewReport("dp_ratio");
  report.trials = options.repeats;
  report.worst_slack = std::numeric_limits<double>::infinity();
  const double limit = std::exp(epsilon_p);
  double worst_excess = -std::numeric_limits<double>::infinity();
  std::size_t tested = 0;
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t hi = std::max(base_count[c], variant_count[c]);
    if (hi < options.min_count) continue;
    ++tested;
    const double lo =
        std::max<double>(1.0, std::min(base_count[c], variant_count[c]));
    const double ratio = static_cast<double>(hi) / lo;
    const double bound =
        limit * (1.0 + options.sigma_multiplier / std::sqrt(lo));
    if (ratio > bound) ++report.violations;
    if (ratio / bound > worst_excess) {
      worst_excess = ratio / bound;
      report.worst_value = ratio;
      report.bound = bound;
    }
    report.worst_slack = std::min(report.worst_slack, bound - ratio);
  }
  report.low_power = tested < 2;
  report.passed = report.violations == 0;
  std::ostringstream note;
  note << "epsilon_p=" << epsilon_p << " bins=" << options.bins
       << " tested_bins=" << tested << " min_count=" << options.min_count;
  report.notes.push_back(note.str());
  if (report.low_power) {
    report.notes.emplace_back(
        "low power: fewer than two populated bins, the pass is vacuous");
  }
  return report;
}

DetIdentityTerms EvaluateDetIdentity(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& e) {
  if (a.rows() != a.cols() || e.rows() != a.rows() || e.cols() != a.cols()) {
    throw InvalidArgument("determinant identity needs square matrices");
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double det_a = lu.determinant();
  if (det_a == 0.0) throw InvalidArgument("A must be full rank");
  const double det_ae = (a + e).partialPivLu().determinant();

  DetIdentityTerms terms;
  terms.lhs = (det_ae - det_a) / det_a;
  const Eigen::MatrixXd m = lu.solve(e);
  const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(m, false)
                                   .eigenvalues();
  std::vector<std::complex<double>> values(eig.data(), eig.data() + eig.size());
  std::sort(values.begin(), values.end(),
            [](const auto& x, const auto& y) { return std::abs(x) > std::abs(y); });
  const std::complex<double> l1 = values.size() > 0 ? values[0] : 0.0;
  const std::complex<double> l2 = values.size() > 1 ? values[1] : 0.0;
  terms.lambda1 = l1.real();
  terms.lambda2 = l2.real();
  terms.rhs = (l1 + l2 + l1 * l2).real();
  const double scale = std::max({std::abs(terms.lhs), std::abs(terms.rhs), 1e-12});
  terms.relative_error = std::abs(terms.lhs - terms.rhs) / scale;
  return terms;
}

AuditReport AuditDetIdentity(int dim, std::size_t trials, RngStream& rng,
                             double tolerance) {
  if (dim < 3) throw PreconditionError("determinant audit needs dim >= 3");
  AuditReport report = NewReport("det_identity");
  report.bound = tolerance;
  auto gaussian = [&](int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = rng.Normal();
    }
    return m;
  };
  for (std::size_t t = 0; t < trials; ++t) {
    const Eigen::MatrixXd g = gaussian(dim, dim);
    const Eigen::MatrixXd a =
        g.transpose() * g + Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::VectorXd u = gaussian(dim, 1);
    const Eigen::VectorXd w = gaussian(dim, 1);
    const double su = rng.Uniform() < 0.5 ? -1.0 : 1.0;
    const double sw = rng.Uniform() < 0.5 ? -1.0 : 1.0;
    const Eigen::MatrixXd e =
        su * u * u.transpose() + sw * w * w.transpose();
    const DetIdentityTerms terms = EvaluateDetIdentity(a, e);
    if (!(terms.relative_error < tolerance)) ++report.violations;
    report.worst_value = std::max(report.worst_value, terms.relative_error);
    ++report.trials;
  }
  report.worst_slack = tolerance - report.worst_value;
  report.passed = report.violations == 0;
  report.notes.emplace_back("random SPD A, symmetric rank-2 E = +-uu' +- ww'");
  return report;
}

double GammaCdfIntegerShape(int k, double theta, double x) {
  if (k < 1 || !(theta > 0.0)) {
    throw InvalidArgument("Gamma CDF needs k >= 1 and theta > 0");
  }
  if (!(x > 0.0)) return 0.0;
  const double t = x / theta;
  // Survival function e^-t sum_{j<k} t^j / j!, accumulated in log space.
  double term = 0.0;  // log(t^j / j!)
  double sum = 1.0;   // relative to the j = 0 term
  double log_first = -t;
  for (int j = 1; j < k; ++j) {
    term += std::log(t) - std::log(static_cast<double>(j));
    sum += std::exp(term);
  }
  const double survival = std::exp(log_first + std::log(sum));
  return std::clamp(1.0 - survival, 0.0, 1.0);
}

AuditReport AuditNoiseLaw(int d, double beta, std::size_t samples,
                          RngStream& rng) {
  if (samples < 10) throw PreconditionError("KS audit needs >= 10 samples");
  std::vector<double> radii(samples);
  for (double& r : radii) r = SampleNoise(NoiseParams{d, beta}, rng).norm();
  std::sort(radii.begin(), radii.end());
  const double n = static_cast<double>(samples);
  double ks = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double cdf = GammaCdfIntegerShape(d, 1.0 / beta, radii[i]);
    ks = std::max({ks, cdf - static_cast<double>(i) / n,
                   static_cast<double>(i + 1) / n - cdf});
  }
  AuditReport report = NewReport("noise_law");
  report.trials = samples;
  report.worst_value = ks;
  report.bound = kKsCoefficient1Pct / std::sqrt(n);
  report.worst_slack = report.bound - ks;
  report.violations = ks < report.bound ? 0 : 1;
  report.passed = report.violations == 0;
  std::ostringstream note;
  note << "KS statistic of ||b|| against Gamma(" << d << ", 1/" << beta
       << "), 1% critical value";
  report.notes.push_back(note.str());
  return report;
}

AuditReport AuditGammaTail(const std::vector<int>& shapes,
                           const std::vector<double>& scales,
                           const std::vector<double>& deltas,
                           std::size_t samples, RngStream& rng) {
  AuditReport report = NewReport("gamma_tail");
  report.worst_slack = std::numeric_limits<double>::infinity();
  for (int k : shapes) {
    for (double theta : scales) {
      for (double delta : deltas) {
        const double threshold = k * theta * std::log(k / delta);
        std::size_t below = 0;
        for (std::size_t s = 0; s < samples; ++s) {
          if (SampleRadius(k, theta, rng) < threshold) ++below;
        }
        const double frac = static_cast<double>(below) / static_cast<double>(samples);
        const double slack = frac - (1.0 - delta);
        if (slack < 0.0) ++report.violations;
        if (slack < report.worst_slack) {
          report.worst_slack = slack;
          report.worst_value = frac;
          report.bound = 1.0 - delta;
        }
        ++report.trials;
      }
    }
  }
  report.passed = report.violations == 0;
  report.notes.emplace_back("P(X < k theta log(k/delta)) >= 1 - delta");
  return report;
}

std::vector<std::string> AuditNames() {
  return {"sensitivity", "dp-ratio", "det-identity", "noise-law", "gamma-tail"};
}

AuditReport RunNamedAudit(std::string_view name, std::string_view config_json) {
  json config = json::object();
  if (!config_json.empty()) {
    try {
      config = json::parse(config_json);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("audit config: ") + e.what());
    }
  }
  const std::uint64_t seed = config.value("seed", std::uint64_t{1});
  RngStream rng(seed);
  const LossSpec loss = LossSpec::FromName(config.value("loss", std::string("logistic")),
                                           config.value("h", kDefaultSmoothing));

  if (name == "sensitivity") {
    const double lambda = config.value("lambda", 0.1);
    const std::size_t n = config.value("n", std::size_t{20});
    const int d = config.value("d", 3);
    const std::size_t count = config.value("pairs", std::size_t{200});
    const double grad_tol = config.value("grad_tol", 1e-12);
    return AuditSensitivity(loss, lambda, RandomNeighborPairs(count, n, d, rng),
                            grad_tol);
  }
  if (name == "dp-ratio") {
    const std::string mechanism = config.value("mechanism", std::string("output"));
    const double lambda = config.value("lambda", 0.5);
    const double epsilon = config.value("epsilon", 2.0);
    const double noise_scale = config.value("noise_scale", 1.0);
    DpRatioOptions options;
    options.repeats = config.value("repeats", options.repeats);
    options.bins = config.value("bins", options.bins);
    options.min_count = config.value("min_count", options.min_count);
    const Method method = ParseMethod(mechanism);
    Mechanism m;
    if (method == Method::kOutput) {
      m = OutputPerturbationMechanism(loss, lambda, epsilon, noise_scale);
    } else if (method == Method::kObjective) {
      m = ObjectivePerturbationMechanism(loss, lambda, epsilon, noise_scale);
    } else {
      throw InvalidArgument("dp-ratio mechanism must be output or objective");
    }
    AuditReport report = AuditDpRatio(m, ToyNeighborPair(), epsilon, options, rng);
    report.notes.push_back("mechanism=" + mechanism + " loss=" +
                           std::string(loss.name()));
    return report;
  }
  if (name == "det-identity") {
    return AuditDetIdentity(config.value("dim", 6),
                            config.value("trials", std::size_t{100}), rng);
  }
  if (name == "noise-law") {
    return AuditNoiseLaw(config.value("d", 5), config.value("beta", 1.0),
                         config.value("samples", std::size_t{10000}), rng);
  }
  if (name == "gamma-tail") {
    return AuditGammaTail({2, 5, 20}, {0.5, 2.0}, {0.1, 0.01},
                          config.value("samples", std::size_t{20000}), rng);
  }
  throw InvalidArgument("unknown audit '" + std::string(name) + "'");
}

}  // namespace dperm
