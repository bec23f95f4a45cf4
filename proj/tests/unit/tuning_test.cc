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

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "dperm/errors.h"
#include "dperm/experiments.h"
#include "dperm/rng.h"
#include "oracles.h"

namespace dperm {
namespace {

std::set<std::vector<double>> RowSet(const Dataset& d) {
  std::set<std::vector<double>> rows;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Example e = d.example(i);
    std::vector<double> r(e.features.data(), e.features.data() + e.features.size());
    r.push_back(e.label);
    rows.insert(r);
  }
  return rows;
}

Dataset Distinct(std::size_t n) {
  std::vector<Example> ex;
  for (std::size_t i = 0; i < n; ++i) {
    ex.push_back({Eigen::VectorXd::Constant(1, static_cast<double>(i) / n), i % 2 ? 1.0 : -1.0});
  }
  return Dataset::FromExamples(ex, 1);
}

TEST(Tuning, SplitsAreEqualAndDisjoint) {
  for (std::size_t n : {100u, 101u}) {
    const Dataset data = Distinct(n);
    RngStream rng(1);
    const std::vector<Dataset> parts = SplitDisjoint(data, 5, rng);
    ASSERT_EQ(parts.size(), 5u);
    std::set<std::vector<double>> seen;
    std::size_t total = 0;
    for (const Dataset& p : parts) {
      EXPECT_EQ(p.size(), 20u);
      for (const auto& r : RowSet(p)) EXPECT_TRUE(seen.insert(r).second);
      total += p.size();
    }
    EXPECT_EQ(total, 100u);
  }
  RngStream a(7), b(7);
  const auto pa = SplitDisjoint(Distinct(50), 3, a);
  const auto pb = SplitDisjoint(Distinct(50), 3, b);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(pa[i].features(), pb[i].features());
  RngStream c(1);
  EXPECT_THROW(SplitDisjoint(Distinct(3), 5, c), PreconditionError);
}

TEST(Tuning, CountMistakes) {
  const Dataset data = Distinct(40);
  TrainedModel zero;
  zero.weights = Eigen::VectorXd::Zero(1);
  EXPECT_EQ(CountMistakes(zero, data), static_cast<std::int64_t>(data.CountLabel(-1.0)));

  // Separable data and its separator.
  std::vector<Example> ex;
  for (int i = 1; i <= 10; ++i) {
    ex.push_back({Eigen::VectorXd::Constant(1, 0.05 * i), 1.0});
    ex.push_back({Eigen::VectorXd::Constant(1, -0.05 * i), -1.0});
  }
  const Dataset sep = Dataset::FromExamples(ex, 1);
  TrainedModel good;
  good.weights = Eigen::VectorXd::Ones(1);
  EXPECT_EQ(CountMistakes(good, sep), 0);

  TrainedModel some;
  some.weights = Eigen::VectorXd::Constant(1, -0.3);
  RowMatrix x = data.features();
  const Dataset flipped(x, -data.labels());
  EXPECT_EQ(CountMistakes(some, flipped),
            static_cast<std::int64_t>(data.size()) - CountMistakes(some, data));
}

TEST(Tuning, SelectionProbabilitiesClosedForm) {
  const std::vector<std::int64_t> z{0, 2};
  const std::vector<double> q = SelectionProbabilities(z, 1.0);
  EXPECT_NEAR(q[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(q[1], std::exp(-1.0) / (1.0 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(q[0], 0.7311, 5e-5);

  RngStream rng(2);
  const int draws = 100000;
  int first = 0;
  for (int i = 0; i < draws; ++i) first += SelectExponential(z, 1.0, rng) == 0;
  EXPECT_NEAR(first / static_cast<double>(draws), q[0],
              3 * std::sqrt(q[0] * q[1] / draws));
}

TEST(Tuning, EqualScoresGiveUniformChoice) {
  const std::vector<std::int64_t> z(6, 17);
  for (double q : SelectionProbabilities(z, 0.7)) EXPECT_NEAR(q, 1.0 / 6.0, 1e-15);
}

TEST(Tuning, LargeEpsilonPicksTheMinimum) {
  const std::vector<std::int64_t> z{0, 1};
  const std::vector<double> q = SelectionProbabilities(z, 100.0);
  EXPECT_GE(q[0], 1.0 - 1e-20);
  EXPECT_NEAR(q[1], std::exp(-50.0), 1e-30);
  // No underflow even for huge counts.
  const std::vector<std::int64_t> big{100000, 100003};
  const std::vector<double> qb = SelectionProbabilities(big, 2.0);
  EXPECT_NEAR(qb[0] + qb[1], 1.0, 1e-15);
  EXPECT_GT(qb[0], qb[1]);
}

TEST(Tuning, ShiftInvariance) {
  RngStream rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::int64_t> z(5);
    for (auto& v : z) v = static_cast<std::int64_t>(rng.UniformIndex(50)) + 20;
    const std::int64_t shift = static_cast<std::int64_t>(rng.UniformIndex(20));
    std::vector<std::int64_t> shifted = z;
    for (auto& v : shifted) v -= shift;
    const auto a = SelectionProbabilities(z, 0.4), b = SelectionProbabilities(shifted, 0.4);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Tuning, ChiSquareGoodnessOfFit) {
  RngStream gen(4);
  for (int t = 0; t < 5; ++t) {
    std::vector<std::int64_t> z(4);
    for (auto& v : z) v = static_cast<std::int64_t>(gen.UniformIndex(4));
    // Closed-form probabilities straight from the definition.
    std::vector<double> q(4);
    double total = 0.0;
    for (int i = 0; i < 4; ++i) total += q[i] = std::exp(-0.8 * static_cast<double>(z[i]) / 2.0);
    for (double& v : q) v /= total;
    std::vector<std::size_t> counts(4, 0);
    RngStream rng(100 + t);
    for (int i = 0; i < 100000; ++i) ++counts[SelectExponential(z, 0.8, rng)];
    EXPECT_LT(oracle::ChiSquareStatistic(counts, q), oracle::ChiSquareQuantile(3, 0.99));
  }
}

TEST(Tuning, SingleCandidateIsReturned) {
  RngStream rng(5);
  const Dataset data = MakeSynthetic({.n = 100, .dimension = 3, .seed = 5});
  TuningConfig config;
  config.lambda_candidates = {0.1};
  config.epsilon_p = 0.5;
  int calls = 0;
  config.trainer = [&](const Dataset& d, double lambda, double eps, RngStream& r) {
    ++calls;
    EXPECT_EQ(d.size(), 50u);
    return TrainOutputPerturbed(d, LossSpec::Logistic(), lambda, eps, r);
  };
  const TrainedModel m = Tune(data, config, rng);
  EXPECT_EQ(calls, 1);
  ASSERT_TRUE(m.tuning);
  EXPECT_EQ(m.tuning->chosen_index, 0u);
  EXPECT_FALSE(m.tuning->scores);
  EXPECT_EQ(m.lambda, 0.1);
}

TEST(Tuning, UtilityBoundHoldsInMostRuns) {
  const Dataset data = MakeSynthetic({.n = 600, .dimension = 5, .seed = 6});
  const std::size_t m = 5;
  const double eps = 1.0, delta = 0.05;
  TuningConfig config;
  config.lambda_candidates = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  config.epsilon_p = eps;
  config.record_scores = true;
  config.trainer = [](const Dataset& d, double lambda, double e, RngStream& r) {
    return TrainObjectivePerturbed(d, LossSpec::Logistic(), lambda, e, r);
  };
  int held = 0;
  const int runs = 500;
  for (int run = 0; run < runs; ++run) {
    RngStream rng(1000 + run);
    const TrainedModel model = Tune(data, config, rng);
    const auto& z = *model.tuning->scores;
    const double zmin = static_cast<double>(*std::min_element(z.begin(), z.end()));
    const double chosen = static_cast<double>(z[model.tuning->chosen_index]);
    held += chosen <= zmin + 2.0 * std::log(m / delta) / eps;
  }
  EXPECT_GE(held, 0.95 * runs);
}

TEST(Tuning, DominantCandidateIsUsuallyChosen) {
  // Candidate 0 yields a perfect model; the others predict +1 everywhere.
  const Dataset data = MakeSynthetic({.n = 600, .dimension = 2, .separation = 3.0, .seed = 7});
  const TrainedModel oracle_model = TrainNonPrivate(data, LossSpec::Logistic(), 1e-3);
  TuningConfig config;
  config.lambda_candidates = {1.0, 2.0, 3.0};
  config.epsilon_p = 2.0;
  config.record_scores = true;
  config.trainer = [&](const Dataset&, double lambda, double, RngStream&) {
    TrainedModel m;
    m.lambda = lambda;
    m.weights = lambda == 1.0 ? oracle_model.weights : Eigen::VectorXd::Zero(2);
    return m;
  };
  int chosen_best = 0;
  const int runs = 300;
  for (int run = 0; run < runs; ++run) {
    RngStream rng(run);
    const TrainedModel m = Tune(data, config, rng);
    const auto& z = *m.tuning->scores;
    ASSERT_GE(std::min(z[1], z[2]) - z[0], 10);
    chosen_best += m.tuning->chosen_index == 0;
  }
  EXPECT_GT(chosen_best, 0.9 * runs);
}

TEST(Tuning, RejectsBadConfigs) {
  RngStream rng(8);
  const Dataset data = Distinct(10);
  TuningConfig config;
  config.epsilon_p = 1.0;
  config.trainer = [](const Dataset& d, double l, double e, RngStream& r) {
    return TrainOutputPerturbed(d, LossSpec::Logistic(), l, e, r);
  };
  EXPECT_THROW(Tune(data, config, rng), InvalidArgument);
  config.lambda_candidates = std::vector<double>(20, 0.1);
  EXPECT_THROW(Tune(data, config, rng), PreconditionError);
  EXPECT_THROW(SelectExponential(std::vector<std::int64_t>{}, 1.0, rng), InvalidArgument);
  EXPECT_THROW(SelectExponential(std::vector<std::int64_t>{1}, 0.0, rng), PreconditionError);
}

}  // namespace
}  // namespace dperm
