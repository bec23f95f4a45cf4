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

#ifndef DPERM_ERM_H_
#define DPERM_ERM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dperm/dataset.h"
#include "dperm/losses.h"
#include "dperm/optimizer.h"
#include "dperm/random_features.h"
#include "dperm/rng.h"

namespace dperm {

enum class Method { kNonPrivate, kOutput, kObjective };

std::string_view MethodName(Method method);
Method ParseMethod(std::string_view name);

// Regularized empirical risk with N(f) = ||f||^2 / 2 plus the optional
// objective-perturbation terms:
//
//   (1/n) sum_i l(y_i f'x_i) + ((lambda + extra_ridge) / 2) ||f||^2
//       + linear' f
class ErmObjective : public Objective {
 public:
  ErmObjective(const Dataset& data, LossSpec loss, double lambda,
               Eigen::VectorXd linear = {}, double extra_ridge = 0.0);

  int dimension() const override { return data_->dimension(); }
  double strong_convexity() const override { return lambda_ + extra_ridge_; }
  double Evaluate(const Eigen::VectorXd& point,
                  Eigen::VectorXd* gradient) const override;

 private:
  const Dataset* data_;
  LossSpec loss_;
  double lambda_;
  Eigen::VectorXd linear_;
  double extra_ridge_;
};

// Privacy bookkeeping. For output perturbation beta = n lambda eps / 2 and
// the slack fields stay at their neutral values; for objective perturbation
// beta = eps' / 2 with eps' and the extra ridge delta from ComputeSlack.
struct PrivacyParams {
  double epsilon_p = 0.0;
  double beta = 0.0;
  double epsilon_p_prime = 0.0;
  double delta_reg = 0.0;

  friend bool operator==(const PrivacyParams&, const PrivacyParams&) = default;
};

// eps' = eps - log(1 + 2c/(n lambda) + c^2/(n lambda)^2). If eps' > 0 the
// extra ridge is zero; otherwise eps' = eps/2 and
// delta = c / (n (e^{eps/4} - 1)) - lambda.
PrivacyParams ComputeSlack(std::size_t n, double lambda, double c,
                           double epsilon_p);

// Provenance of a model chosen by private tuning.
struct TuningRecord {
  std::vector<double> candidates;
  std::size_t chosen_index = 0;
  // Validation mistake counts; only kept when explicitly requested.
  std::optional<std::vector<std::int64_t>> scores;

  friend bool operator==(const TuningRecord&, const TuningRecord&) = default;
};

struct TrainedModel {
  Eigen::VectorXd weights;
  Method method = Method::kNonPrivate;
  LossSpec loss = LossSpec::Logistic();
  double lambda = 0.0;
  std::optional<double> epsilon_p;
  std::uint64_t seed = 0;
  // Absolute gradient-norm tolerance the solver was run to.
  double solver_tol = 0.0;
  bool converged = true;
  std::optional<PrivacyParams> privacy;
  std::optional<RandomFeatureMap> feature_map;
  std::optional<TuningRecord> tuning;
  // Free-form qualifications of the guarantee, e.g. Huber under objective
  // perturbation.
  std::vector<std::string> caveats;

  friend bool operator==(const TrainedModel& a, const TrainedModel& b);
};

inline constexpr std::string_view kHuberObjectiveCaveat =
    "measure-zero differentiability caveat";

TrainedModel TrainNonPrivate(const Dataset& data, const LossSpec& loss,
                             double lambda, const SolverOptions& solver = {});

// Output perturbation: exact minimizer plus noise with beta = n lambda eps/2.
TrainedModel TrainOutputPerturbed(const Dataset& data, const LossSpec& loss,
                                  double lambda, double epsilon_p,
                                  RngStream& rng,
                                  const SolverOptions& solver = {});

// Objective perturbation: minimizes J(f) + b'f/n + (delta/2)||f||^2 with b
// drawn at beta = eps'/2.
TrainedModel TrainObjectivePerturbed(const Dataset& data, const LossSpec& loss,
                                     double lambda, double epsilon_p,
                                     RngStream& rng,
                                     const SolverOptions& solver = {});

// Same as the trainers above with the noise vector supplied by the caller.
// The randomized entry points draw their noise and delegate here.
TrainedModel OutputPerturbedWithNoise(const Dataset& data, const LossSpec& loss,
                                      double lambda, double epsilon_p,
                                      const Eigen::VectorXd& noise,
                                      const SolverOptions& solver = {});
TrainedModel ObjectivePerturbedWithNoise(const Dataset& data,
                                         const LossSpec& loss, double lambda,
                                         const PrivacyParams& privacy,
                                         const Eigen::VectorXd& noise,
                                         const SolverOptions& solver = {});

// Dispatch on method; `rng` is ignored for kNonPrivate.
TrainedModel Train(Method method, const Dataset& data, const LossSpec& loss,
                   double lambda, double epsilon_p, RngStream& rng,
                   const SolverOptions& solver = {});

struct Prediction {
  double score = 0.0;
  int label = 1;
};

// score = w' x (after the feature map if present); sign(0) = +1.
Prediction Predict(const TrainedModel& model, const Eigen::VectorXd& x);

struct ErrorCounts {
  std::size_t examples = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  std::size_t mistakes() const { return false_positives + false_negatives; }
  double error_rate() const {
    return examples == 0 ? 0.0
                         : static_cast<double>(mistakes()) /
                               static_cast<double>(examples);
  }
};

ErrorCounts Evaluate(const TrainedModel& model, const Dataset& data);

// JSON document:
//   {method, loss:{kind,h}, lambda, epsilon_p, seed, solver_tol, weights,
//    feature_map:{D,d,gamma,norm_mode,frequencies,phases}|null, ...}
// Doubles are written in shortest round-trip form, so Parse(Serialize(m))
// reproduces every field bit for bit.
std::string ModelToJson(const TrainedModel& model, int indent = -1);
TrainedModel ModelFromJson(std::string_view json);

}  // namespace dperm

#endif  // DPERM_ERM_H_
