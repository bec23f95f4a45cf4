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

#include "dperm/random_features.h"

#include <numbers>
#include <string>
#include <utility>

#include "dperm/errors.h"

namespace dperm {

std::string_view NormModeName(NormMode mode) {
  return mode == NormMode::kRaw ? "raw" : "rescale_half";
}

NormMode ParseNormMode(std::string_view name) {
  if (name == "rescale_half" || name == "rescale-half") {
    return NormMode::kRescaleHalf;
  }
  if (name == "raw") return NormMode::kRaw;
  throw InvalidArgument("unknown norm mode '" + std::string(name) + "'");
}

RandomFeatureMap::RandomFeatureMap(double gamma, NormMode norm_mode,
                                   Eigen::MatrixXd frequencies,
                                   Eigen::VectorXd phases)
    : gamma_(gamma),
      norm_mode_(norm_mode),
      frequencies_(std::move(frequencies)),
      phases_(std::move(phases)) {
  if (!(gamma_ > 0.0)) throw InvalidArgument("kernel gamma must be positive");
  if (frequencies_.rows() < 1 || frequencies_.cols() < 1) {
    throw InvalidArgument("feature map needs D >= 1 and d >= 1");
  }
  if (frequencies_.rows() != phases_.size()) {
    throw InvalidArgument("feature map: frequency and phase counts differ");
  }
  if ((phases_.array().abs() > std::numbers::pi).any()) {
    throw InvalidArgument("feature map: phases must lie in [-pi, pi]");
  }
}

double RandomFeatureMap::feature_scale() const {
  const double base = std::sqrt(2.0 / static_cast<double>(output_dim()));
  return norm_mode_ == NormMode::kRescaleHalf ? base / std::numbers::sqrt2
                                              : base;
}

Eigen::VectorXd RandomFeatureMap::Apply(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) {
    throw InvalidArgument("feature map expects dimension " +
                          std::to_string(input_dim()) + ", got " +
                          std::to_string(x.size()));
  }
  Eigen::VectorXd v = frequencies_ * x + phases_;
  return feature_scale() * v.array().cos().matrix();
}

Dataset RandomFeatureMap::Apply(const Dataset& data) const {
  if (data.dimension() != input_dim()) {
    throw InvalidArgument("feature map expects dimension " +
                          std::to_string(input_dim()) + ", got " +
                          std::to_string(data.dimension()));
  }
  RowMatrix mapped = (data.features() * frequencies_.transpose()).rowwise() +
                     phases_.transpose();
  mapped = feature_scale() * mapped.array().cos().matrix();
  return Dataset(std::move(mapped), data.labels());
}

bool operator==(const RandomFeatureMap& a, const RandomFeatureMap& b) {
  return a.gamma_ == b.gamma_ && a.norm_mode_ == b.norm_mode_ &&
         a.frequencies_.rows() == b.frequencies_.rows() &&
         a.frequencies_.cols() == b.frequencies_.cols() &&
         a.frequencies_ == b.frequencies_ && a.phases_ == b.phases_;
}

RandomFeatureMap SampleGaussianFeatures(int input_dim, int output_dim,
                                        double gamma, RngStream& rng,
                                        NormMode mode) {
  if (input_dim < 1 || output_dim < 1) {
    throw InvalidArgument("feature map needs D >= 1 and d >= 1");
  }
  if (!(gamma > 0.0)) throw InvalidArgument("kernel gamma must be positive");
  const double stddev = std::sqrt(2.0 * gamma);
  Eigen::MatrixXd frequencies(output_dim, input_dim);
  Eigen::VectorXd phases(output_dim);
  for (int j = 0; j < output_dim; ++j) {
    for (int k = 0; k < input_dim; ++k) frequencies(j, k) = stddev * rng.Normal();
    phases[j] = rng.Uniform(-std::numbers::pi, std::numbers::pi);
  }
  return RandomFeatureMap(gamma, mode, std::move(frequencies), std::move(phases));
}

}  // namespace dperm
