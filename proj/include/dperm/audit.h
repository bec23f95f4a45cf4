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

#ifndef DPERM_AUDIT_H_
#define DPERM_AUDIT_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dperm/dataset.h"
#include "dperm/erm.h"
#include "dperm/losses.h"
#include "dperm/rng.h"

namespace dperm {

// Audits can only falsify a privacy claim; a pass is evidence, not proof.
inline constexpr std::string_view kAuditDisclaimer =
    "falsification test only: a finite-sample audit cannot certify "
    "differential privacy";

struct NeighborPair {
  Dataset base;
  Dataset variant;
  std::size_t changed_index = 0;
};

// Builds the pair (data, data with example `index` replaced). Throws
// PreconditionError if the replacement equals the original.
NeighborPair MakeNeighborPair(const Dataset& data, std::size_t index,
                              const Example& replacement);
// Throws PreconditionError unless exactly one example differs.
void ValidateNeighborPair(const NeighborPair& pair);

// Five one-dimensional examples and a variant whose last example moves from
// x = 1 to x = -1; used for the histogram ratio audits.
NeighborPair ToyNeighborPair();

// Uniform points in the unit ball with random labels.
Dataset RandomUnitBallDataset(std::size_t n, int d, RngStream& rng);
std::vector<NeighborPair> RandomNeighborPairs(std::size_t count, std::size_t n,
                                              int d, RngStream& rng);

struct AuditReport {
  std::string name;
  std::size_t trials = 0;
  // Worst observed statistic and the bound it is compared with; slack is
  // bound - worst (negative on failure).
  double worst_value = 0.0;
  double bound = 0.0;
  double worst_slack = 0.0;
  std::size_t violations = 0;
  bool passed = false;
  bool low_power = false;
  double solver_tol = 0.0;
  std::vector<std::string> notes;

  std::string ToJson(int indent = 2) const;
};

// ||f*(D) - f*(D')|| <= 2/(n lambda) + 2 grad_tol/lambda on every pair, with
// grad_tol the absolute solver threshold.
AuditReport AuditSensitivity(const LossSpec& loss, double lambda,
                             const std::vector<NeighborPair>& pairs,
                             double grad_tol);

// A randomized release with 1- or 2-dimensional output.
using Mechanism =
    std::function<Eigen::VectorXd(const Dataset& data, RngStream& rng)>;

// Output / objective perturbation as mechanisms. `noise_scale` multiplies
// the calibrated noise; values below 1 give a deliberately broken mechanism.
Mechanism OutputPerturbationMechanism(const LossSpec& loss, double lambda,
                                      double epsilon_p,
                                      double noise_scale = 1.0,
                                      const SolverOptions& solver = {});
Mechanism ObjectivePerturbationMechanism(const LossSpec& loss, double lambda,
                                         double epsilon_p,
                                         double noise_scale = 1.0,
                                         const SolverOptions& solver = {});

struct DpRatioOptions {
  std::size_t repeats = 100000;
  int bins = 50;
  // A bin is tested when its count under either dataset reaches this.
  std::size_t min_count = 500;
  // Multiplicative statistical allowance: ratio <= e^eps (1 + z/sqrt(count)).
  double sigma_multiplier = 4.0;
  // Lower bound on the half-width of the histogram range around the center
  // of the two output distributions.
  double min_half_width = 0.0;
};

// Histograms both output distributions on a shared grid and checks every
// sufficiently populated bin against the e^eps likelihood-ratio bound.
AuditReport AuditDpRatio(const Mechanism& mechanism, const NeighborPair& pair,
                         double epsilon_p, const DpRatioOptions& options,
                         RngStream& rng);

struct DetIdentityTerms {
  double lhs = 0.0;  // (det(A+E) - det A) / det A
  double rhs = 0.0;  // l1 + l2 + l1 l2
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double relative_error = 0.0;
};

// Evaluates both sides for a full-rank A and an E of rank <= 2. The two
// eigenvalues of A^-1 E with largest magnitude are used (the rest vanish).
DetIdentityTerms EvaluateDetIdentity(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& e);

// (det(A+E) - det A) / det A against l1 + l2 + l1 l2 with l1, l2 the two
// largest-magnitude eigenvalues of A^-1 E, for random SPD A and random
// symmetric E of rank <= 2.
AuditReport AuditDetIdentity(int dim, std::size_t trials, RngStream& rng,
                             double tolerance = 1e-8);

// CDF of Gamma(k, theta) for integer shape k.
double GammaCdfIntegerShape(int k, double theta, double x);

// Kolmogorov-Smirnov test of sampled noise norms against Gamma(d, 1/beta).
AuditReport AuditNoiseLaw(int d, double beta, std::size_t samples,
                          RngStream& rng);

// Empirical check of P(X < k theta log(k/delta)) >= 1 - delta for
// X ~ Gamma(k, theta) over a grid of (k, theta, delta).
AuditReport AuditGammaTail(const std::vector<int>& shapes,
                           const std::vector<double>& scales,
                           const std::vector<double>& deltas,
                           std::size_t samples, RngStream& rng);

// Registry used by the CLI and C API. `config_json` may override defaults
// (seed, repeats, lambda, n, ...). Known names are listed by AuditNames().
AuditReport RunNamedAudit(std::string_view name, std::string_view config_json);
std::vector<std::string> AuditNames();

}  // namespace dperm

#endif  // DPERM_AUDIT_H_
