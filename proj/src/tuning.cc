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

#include "dperm/tuning.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "dperm/errors.h"

namespace dperm {

std::vector<Dataset> SplitDisjoint(const Dataset& data, std::size_t parts,
                                   RngStream& rng) {
  if (parts == 0) throw InvalidArgument("need at least one portion");
  if (data.size() < parts) {
    std::ostringstream msg;
    msg << "cannot split " << data.size() << " examples into " << parts
        << " nonempty portions";
    throw PreconditionError(msg.str());
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.UniformIndex(i + 1)]);
  }
  const std::size_t portion = data.size() / parts;
  std::vector<Dataset> out;
  out.reserve(parts);
  for (std::size_t p = 0; p < parts; ++p) {
    out.push_back(data.Subset(
        std::span<const std::size_t>(order).subspan(p * portion, portion)));
  }
  return out;
}

std::int64_t CountMistakes(const TrainedModel& model,
                           const Dataset& validation) {
  return static_cast<std::int64_t>(Evaluate(model, validation).mistakes());
}

std::vector<double> SelectionProbabilities(std::span<const std::int64_t> scores,
                                           double epsilon_p) {
  if (scores.empty()) throw InvalidArgument("no candidates to select from");
  if (!(epsilon_p > 0.0)) {
    throw PreconditionError("epsilon_p must be positive");
  }
  const std::int64_t best = *std::min_element(scores.begin(), scores.end());
  std::vector<double> q(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < 0) throw InvalidArgument("scores must be nonnegative");
    q[i] = std::exp(-epsilon_p * static_cast<double>(scores[i] - best) / 2.0);
    total += q[i];
  }
  for (double& v : q) v /= total;
  return q;
}

std::size_t SelectExponential(std::span<const std::int64_t> scores,
                              double epsilon_p, RngStream& rng) {
  const std::vector<double> q = SelectionProbabilities(scores, epsilon_p);
  const double u = rng.Uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    cumulative += q[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  return last_positive;
}

TrainedModel Tune(const Dataset& data, const TuningConfig& config,
                  RngStream& rng) {
  const std::size_t m = config.lambda_candidates.size();
  if (m == 0) throw InvalidArgument("tuning needs at least one candidate");
  if (!config.trainer) throw InvalidArgument("tuning needs a trainer");
  if (!(config.epsilon_p > 0.0)) {
    throw PreconditionError("epsilon_p must be positive");
  }
  if (data.size() < m + 1) {
    std::ostringstream msg;
    msg << "tuning over " << m << " candidates needs at least " << m + 1
        << " examples, got " << data.size();
    throw PreconditionError(msg.str());
  }

  RngStream split_rng = rng.Split(0);
  const std::vector<Dataset> portions = SplitDisjoint(data, m + 1, split_rng);
  const Dataset& validation = portions[m];

  std::vector<TrainedModel> models;
  std::vector<std::int64_t> scores;
  models.reserve(m);
  scores.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    RngStream train_rng = rng.Split(i + 1);
    models.push_back(config.trainer(portions[i], config.lambda_candidates[i],
                                    config.epsilon_p, train_rng));
    scores.push_back(CountMistakes(models.back(), validation));
  }

  RngStream select_rng = rng.Split(m + 1);
  const std::size_t chosen = SelectExponential(scores, config.epsilon_p, select_rng);

  TrainedModel out = std::move(models[chosen]);
  out.tuning.emplace();
  out.tuning->candidates = config.lambda_candidates;
  out.tuning->chosen_index = chosen;
  if (config.record_scores) out.tuning->scores.emplace(std::move(scores));
  return out;
}

}  // namespace dperm
