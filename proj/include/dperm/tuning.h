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

#ifndef DPERM_TUNING_H_
#define DPERM_TUNING_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dperm/dataset.h"
#include "dperm/erm.h"
#include "dperm/rng.h"

namespace dperm {

// Any private training routine: (data, lambda, epsilon_p, rng) -> model.
using PrivateTrainer = std::function<TrainedModel(
    const Dataset& data, double lambda, double epsilon_p, RngStream& rng)>;

struct TuningConfig {
  // Fixed before looking at the data.
  std::vector<double> lambda_candidates;
  double epsilon_p = 1.0;
  PrivateTrainer trainer;
  // Keep the validation mistake counts in the model provenance. Off by
  // default: the guarantee covers releasing the m models and the index.
  bool record_scores = false;
};

// Random permutation cut into `parts` portions of floor(n / parts) examples;
// the remainder is discarded.
std::vector<Dataset> SplitDisjoint(const Dataset& data, std::size_t parts,
                                   RngStream& rng);

std::int64_t CountMistakes(const TrainedModel& model,
                           const Dataset& validation);

// q_i = exp(-eps (z_i - min z) / 2) / sum_j exp(-eps (z_j - min z) / 2).
std::vector<double> SelectionProbabilities(std::span<const std::int64_t> scores,
                                           double epsilon_p);

// Draws index i with probability q_i.
std::size_t SelectExponential(std::span<const std::int64_t> scores,
                              double epsilon_p, RngStream& rng);

// Splits into m + 1 portions, trains candidate i on portion i with the full
// budget, counts mistakes on the last portion and picks one model with the
// exponential mechanism.
TrainedModel Tune(const Dataset& data, const TuningConfig& config,
                  RngStream& rng);

}  // namespace dperm

#endif  // DPERM_TUNING_H_
