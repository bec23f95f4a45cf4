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

#ifndef DPERM_RANDOM_FEATURES_H_
#define DPERM_RANDOM_FEATURES_H_

#include <cmath>
#include <string_view>

#include <Eigen/Dense>

#include "dperm/dataset.h"
#include "dperm/rng.h"

namespace dperm {

enum class NormMode {
  // Features scaled by an extra 1/sqrt(2) so that ||v(x)|| <= 1 always holds
  // and the mapped data meets the unit-ball precondition of the trainers.
  kRescaleHalf,
  // Plain sqrt(2/D) cos(w'x + psi); inner products estimate the kernel.
  kRaw,
};

std::string_view NormModeName(NormMode mode);
NormMode ParseNormMode(std::string_view name);

// Random Fourier features for the Gaussian kernel exp(-gamma ||x - x'||^2).
// Frequencies are rows of a D x d matrix drawn from N(0, 2 gamma I), phases
// are uniform on [-pi, pi]. The map never looks at training data.
class RandomFeatureMap {
 public:
  RandomFeatureMap(double gamma, NormMode norm_mode, Eigen::MatrixXd frequencies,
                   Eigen::VectorXd phases);

  int output_dim() const { return static_cast<int>(phases_.size()); }
  int input_dim() const { return static_cast<int>(frequencies_.cols()); }
  double gamma() const { return gamma_; }
  NormMode norm_mode() const { return norm_mode_; }
  const Eigen::MatrixXd& frequencies() const { return frequencies_; }
  const Eigen::VectorXd& phases() const { return phases_; }

  // Per-feature scale: sqrt(2/D), times 1/sqrt(2) in kRescaleHalf mode.
  double feature_scale() const;

  Eigen::VectorXd Apply(const Eigen::VectorXd& x) const;
  Dataset Apply(const Dataset& data) const;

  friend bool operator==(const RandomFeatureMap& a, const RandomFeatureMap& b);

 private:
  double gamma_;
  NormMode norm_mode_;
  Eigen::MatrixXd frequencies_;
  Eigen::VectorXd phases_;
};

RandomFeatureMap SampleGaussianFeatures(int input_dim, int output_dim,
                                        double gamma, RngStream& rng,
                                        NormMode mode = NormMode::kRescaleHalf);

inline Eigen::VectorXd ApplyFeatureMap(const RandomFeatureMap& map,
                                       const Eigen::VectorXd& x) {
  return map.Apply(x);
}

inline double GaussianKernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             double gamma) {
  return std::exp(-gamma * (x - y).squaredNorm());
}

}  // namespace dperm

#endif  // DPERM_RANDOM_FEATURES_H_
