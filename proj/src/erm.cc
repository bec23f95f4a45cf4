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

#include "dperm/erm.h"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "json.hpp"

#include "dperm/errors.h"
#include "dperm/noise.h"

namespace dperm {
namespace {

using nlohmann::json;

void CheckTrainingInputs(const Dataset& data, double lambda) {
  if (data.empty()) throw PreconditionError("cannot train on an empty dataset");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    std::ostringstream msg;
    msg << "regularization lambda must be positive, got " << lambda;
    throw PreconditionError(msg.str());
  }
}

void CheckEpsilon(double epsilon_p) {
  if (!(epsilon_p > 0.0) || std::isnan(epsilon_p)) {
    std::ostringstream msg;
    msg << "privacy budget epsilon_p must be positive, got " << epsilon_p;
    throw PreconditionError(msg.str());
  }
}

TrainedModel FromSolve(const LossSpec& loss, double lambda,
                       const Objective& objective,
                       const SolverOptions& solver) {
  SolverResult solved = Minimize(objective, solver);
  TrainedModel model;
  model.weights = std::move(solved.minimizer);
  model.loss = loss;
  model.lambda = lambda;
  model.solver_tol = solved.tolerance;
  model.converged = solved.converged;
  return model;
}

// Scores w' phi(x) for every row of `features`.
Eigen::VectorXd Scores(const TrainedModel& model, const RowMatrix& features) {
  if (model.feature_map) {
    const RandomFeatureMap& map = *model.feature_map;
    if (features.cols() != map.input_dim()) {
      throw InvalidArgument("data dimension does not match the feature map");
    }
    RowMatrix mapped =
        (features * map.frequencies().transpose()).rowwise() +
        map.phases().transpose();
    mapped = map.feature_scale() * mapped.array().cos().matrix();
    return mapped * model.weights;
  }
  if (features.cols() != model.weights.size()) {
    throw InvalidArgument("data dimension does not match the model");
  }
  return features * model.weights;
}

json VectorToJson(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd VectorFromJson(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json FeatureMapToJson(const RandomFeatureMap& map) {
  json frequencies = json::array();
  for (Eigen::Index r = 0; r < map.frequencies().rows(); ++r) {
    frequencies.push_back(VectorToJson(map.frequencies().row(r).transpose()));
  }
  return json{{"D", map.output_dim()},
              {"d", map.input_dim()},
              {"gamma", map.gamma()},
              {"norm_mode", std::string(NormModeName(map.norm_mode()))},
              {"frequencies", std::move(frequencies)},
              {"phases", VectorToJson(map.phases())}};
}

RandomFeatureMap FeatureMapFromJson(const json& j) {
  const int D = j.at("D").get<int>();
  const int d = j.at("d").get<int>();
  const json& rows = j.at("frequencies");
  if (rows.size() != static_cast<std::size_t>(D)) {
    throw ParseError("feature_map: expected " + std::to_string(D) +
                     " frequency rows");
  }
  Eigen::MatrixXd frequencies(D, d);
  for (int r = 0; r < D; ++r) {
    if (rows[r].size() != static_cast<std::size_t>(d)) {
      throw ParseError("feature_map: frequency row has wrong length");
    }
    for (int c = 0; c < d; ++c) frequencies(r, c) = rows[r][c].get<double>();
  }
  return RandomFeatureMap(j.at("gamma").get<double>(),
                          ParseNormMode(j.at("norm_mode").get<std::string>()),
                          std::move(frequencies),
                          VectorFromJson(j.at("phases")));
}

}  // namespace

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kNonPrivate:
      return "nonprivate";
    case Method::kOutput:
      return "output";
    case Method::kObjective:
      return "objective";
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  if (name == "nonprivate" || name == "non-private") return Method::kNonPrivate;
  if (name == "output") return Method::kOutput;
  if (name == "objective") return Method::kObjective;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

ErmObjective::ErmObjective(const Dataset& data, LossSpec loss, double lambda,
                           Eigen::VectorXd linear, double extra_ridge)
    : data_(&data),
      loss_(loss),
      lambda_(lambda),
      linear_(std::move(linear)),
      extra_ridge_(extra_ridge) {
  if (data.empty()) throw PreconditionError("objective over an empty dataset");
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  if (!(extra_ridge >= 0.0)) {
    throw InvalidArgument("extra ridge term must be nonnegative");
  }
  if (linear_.size() == 0) {
    linear_ = Eigen::VectorXd::Zero(data.dimension());
  } else if (linear_.size() != data.dimension()) {
    throw InvalidArgument("linear term dimension does not match the data");
  }
}

double ErmObjective::Evaluate(const Eigen::VectorXd& point,
                              Eigen::VectorXd* gradient) const {
  const RowMatrix& x = data_->features();
  const Eigen::VectorXd& y = data_->labels();
  const auto n = static_cast<double>(data_->size());
  const double ridge = lambda_ + extra_ridge_;

  // One pass over the rows: the data matrix dominates memory traffic.
  double risk = 0.0;
  Eigen::VectorXd sum;
  if (gradient != nullptr) sum = Eigen::VectorXd::Zero(point.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    const double z = y[i] * row.dot(point.transpose());
    risk += loss_.Value(z);
    if (gradient != nullptr) {
      sum.noalias() += (y[i] * loss_.Derivative(z)) * row.transpose();
    }
  }
  if (gradient != nullptr) {
    *gradient = sum / n + ridge * point + linear_;
  }
  return risk / n + 0.5 * ridge * point.squaredNorm() + linear_.dot(point);
}

PrivacyParams ComputeSlack(std::size_t n, double lambda, double c,
                           double epsilon_p) {
  if (n == 0) throw PreconditionError("slack needs n >= 1");
  if (!(lambda > 0.0)) throw PreconditionError("slack needs lambda > 0");
  if (!(c >= 0.0)) throw PreconditionError("slack needs c >= 0");
  CheckEpsilon(epsilon_p);

  const double ratio = c / (static_cast<double>(n) * lambda);
  PrivacyParams out;
  out.epsilon_p = epsilon_p;
  out.epsilon_p_prime = epsilon_p - std::log1p(2.0 * ratio + ratio * ratio);
  if (out.epsilon_p_prime > 0.0) {
    out.delta_reg = 0.0;
  } else {
    out.epsilon_p_prime = epsilon_p / 2.0;
    out.delta_reg =
        c / (static_cast<double>(n) * std::expm1(epsilon_p / 4.0)) - lambda;
  }
  out.beta = out.epsilon_p_prime / 2.0;
  return out;
}

bool operator==(const TrainedModel& a, const TrainedModel& b) {
  return a.weights.size() == b.weights.size() && a.weights == b.weights &&
         a.method == b.method && a.loss == b.loss && a.lambda == b.lambda &&
         a.epsilon_p == b.epsilon_p && a.seed == b.seed &&
         a.solver_tol == b.solver_tol && a.converged == b.converged &&
         a.privacy == b.privacy && a.feature_map == b.feature_map &&
         a.tuning == b.tuning && a.caveats == b.caveats;
}

TrainedModel TrainNonPrivate(const Dataset& data, const LossSpec& loss,
                             double lambda, const SolverOptions& solver) {
  CheckTrainingInputs(data, lambda);
  const ErmObjective objective(data, loss, lambda);
  TrainedModel model = FromSolve(loss, lambda, objective, solver);
  model.method = Method::kNonPrivate;
  return model;
}

TrainedModel OutputPerturbedWithNoise(const Dataset& data, const LossSpec& loss,
                                      double lambda, double epsilon_p,
                                      const Eigen::VectorXd& noise,
                                      const SolverOptions& solver) {
  CheckTrainingInputs(data, lambda);
  CheckEpsilon(epsilon_p);
  if (noise.size() != data.dimension()) {
    throw InvalidArgument("noise dimension does not match the data");
  }
  TrainedModel model = TrainNonPrivate(data, loss, lambda, solver);
  model.weights += noise;
  model.method = Method::kOutput;
  model.epsilon_p = epsilon_p;
  PrivacyParams privacy;
  privacy.epsilon_p = epsilon_p;
  privacy.epsilon_p_prime = epsilon_p;
  privacy.beta = static_cast<double>(data.size()) * lambda * epsilon_p / 2.0;
  model.privacy = privacy;
  return model;
}

TrainedModel TrainOutputPerturbed(const Dataset& data, const LossSpec& loss,
                                  double lambda, double epsilon_p,
                                  RngStream& rng, const SolverOptions& solver) {
  CheckTrainingInputs(data, lambda);
  CheckEpsilon(epsilon_p);
  const NoiseParams noise{
      data.dimension(),
      static_cast<double>(data.size()) * lambda * epsilon_p / 2.0};
  const Eigen::VectorXd b = SampleNoise(noise, rng);
  TrainedModel model =
      OutputPerturbedWithNoise(data, loss, lambda, epsilon_p, b, solver);
  model.seed = rng.seed();
  return model;
}

TrainedModel ObjectivePerturbedWithNoise(const Dataset& data,
                                         const LossSpec& loss, double lambda,
                                         const PrivacyParams& privacy,
                                         const Eigen::VectorXd& noise,
                                         const SolverOptions& solver) {
  CheckTrainingInputs(data, lambda);
  CheckEpsilon(privacy.epsilon_p);
  if (noise.size() != data.dimension()) {
    throw InvalidArgument("noise dimension does not match the data");
  }
  const ErmObjective objective(data, loss, lambda,
                               noise / static_cast<double>(data.size()),
                               privacy.delta_reg);
  TrainedModel model = FromSolve(loss, lambda, objective, solver);
  model.method = Method::kObjective;
  model.epsilon_p = privacy.epsilon_p;
  model.privacy = privacy;
  if (loss.kind() == LossKind::kHuber) {
    model.caveats.emplace_back(kHuberObjectiveCaveat);
  }
  return model;
}

TrainedModel TrainObjectivePerturbed(const Dataset& data, const LossSpec& loss,
                                     double lambda, double epsilon_p,
                                     RngStream& rng,
                                     const SolverOptions& solver) {
  CheckTrainingInputs(data, lambda);
  CheckEpsilon(epsilon_p);
  const PrivacyParams privacy =
      ComputeSlack(data.size(), lambda, loss.curvature_bound(), epsilon_p);
  const Eigen::VectorXd b =
      SampleNoise(NoiseParams{data.dimension(), privacy.beta}, rng);
  TrainedModel model =
      ObjectivePerturbedWithNoise(data, loss, lambda, privacy, b, solver);
  model.seed = rng.seed();
  return model;
}

TrainedModel Train(Method method, const Dataset& data, const LossSpec& loss,
                   double lambda, double epsilon_p, RngStream& rng,
                   const SolverOptions& solver) {
  switch (method) {
    case Method::kNonPrivate:
      return TrainNonPrivate(data, loss, lambda, solver);
    case Method::kOutput:
      return TrainOutputPerturbed(data, loss, lambda, epsilon_p, rng, solver);
    case Method::kObjective:
      return TrainObjectivePerturbed(data, loss, lambda, epsilon_p, rng, solver);
  }
  throw InvalidArgument("unknown method");
}

Prediction Predict(const TrainedModel& model, const Eigen::VectorXd& x) {
  double score = 0.0;
  if (model.feature_map) {
    const Eigen::VectorXd v = model.feature_map->Apply(x);
    if (v.size() != model.weights.size()) {
      throw InvalidArgument("feature map output does not match the weights");
    }
    score = model.weights.dot(v);
  } else {
    if (x.size() != model.weights.size()) {
      throw InvalidArgument("input has dimension " + std::to_string(x.size()) +
                            ", model expects " +
                            std::to_string(model.weights.size()));
    }
    score = model.weights.dot(x);
  }
  return Prediction{score, score >= 0.0 ? 1 : -1};
}

ErrorCounts Evaluate(const TrainedModel& model, const Dataset& data) {
  ErrorCounts counts;
  counts.examples = data.size();
  if (data.empty()) return counts;
  const Eigen::VectorXd scores = Scores(model, data.features());
  const Eigen::VectorXd& y = data.labels();
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double predicted = scores[i] >= 0.0 ? 1.0 : -1.0;
    if (predicted == y[i]) continue;
    if (predicted > 0.0) {
      ++counts.false_positives;
    } else {
      ++counts.false_negatives;
    }
  }
  return counts;
}

std::string ModelToJson(const TrainedModel& model, int indent) {
  json j;
  j["format"] = "dperm-model";
  j["version"] = 1;
  j["method"] = std::string(MethodName(model.method));
  j["loss"] = json{{"kind", std::string(model.loss.name())},
                   {"h", model.loss.h()}};
  j["lambda"] = model.lambda;
  j["epsilon_p"] = model.epsilon_p ? json(*model.epsilon_p) : json(nullptr);
  j["seed"] = model.seed;
  j["solver_tol"] = model.solver_tol;
  j["converged"] = model.converged;
  j["weights"] = VectorToJson(model.weights);
  if (model.privacy) {
    j["privacy"] = json{{"epsilon_p", model.privacy->epsilon_p},
                        {"beta", model.privacy->beta},
                        {"epsilon_p_prime", model.privacy->epsilon_p_prime},
                        {"delta_reg", model.privacy->delta_reg}};
  } else {
    j["privacy"] = nullptr;
  }
  j["feature_map"] =
      model.feature_map ? FeatureMapToJson(*model.feature_map) : json(nullptr);
  if (model.tuning) {
    json t{{"candidates", model.tuning->candidates},
           {"chosen_index", model.tuning->chosen_index}};
    if (model.tuning->scores) t["scores"] = *model.tuning->scores;
    j["tuning"] = std::move(t);
  } else {
    j["tuning"] = nullptr;
  }
  j["caveats"] = model.caveats;
  return j.dump(indent);
}

TrainedModel ModelFromJson(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  try {
    TrainedModel model;
    model.method = ParseMethod(j.at("method").get<std::string>());
    const json& loss = j.at("loss");
    const std::string kind = loss.at("kind").get<std::string>();
    model.loss = kind == "logistic"
                     ? LossSpec::Logistic()
                     : LossSpec::FromName(kind, loss.at("h").get<double>());
    model.lambda = j.at("lambda").get<double>();
    if (!j.at("epsilon_p").is_null()) {
      model.epsilon_p = j.at("epsilon_p").get<double>();
    }
    model.seed = j.at("seed").get<std::uint64_t>();
    model.solver_tol = j.at("solver_tol").get<double>();
    model.converged = j.value("converged", true);
    model.weights = VectorFromJson(j.at("weights"));
    if (j.contains("privacy") && !j["privacy"].is_null()) {
      const json& p = j["privacy"];
      model.privacy = PrivacyParams{p.at("epsilon_p").get<double>(),
                                    p.at("beta").get<double>(),
                                    p.at("epsilon_p_prime").get<double>(),
                                    p.at("delta_reg").get<double>()};
    }
    if (!j.at("feature_map").is_null()) {
      model.feature_map = FeatureMapFromJson(j["feature_map"]);
      if (model.feature_map->output_dim() != model.weights.size()) {
        throw ParseError("feature_map D does not match the weight count");
      }
    }
    if (j.contains("tuning") && !j["tuning"].is_null()) {
      const json& t = j["tuning"];
      TuningRecord record;
      record.candidates = t.at("candidates").get<std::vector<double>>();
      record.chosen_index = t.at("chosen_index").get<std::size_t>();
      if (t.contains("scores")) {
        record.scores = t["scores"].get<std::vector<std::int64_t>>();
      }
      model.tuning = std::move(record);
    }
    if (j.contains("caveats")) {
      model.caveats = j["caveats"].get<std::vector<std::string>>();
    }
    if (!model.weights.allFinite()) throw ParseError("non-finite weights");
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace dperm
