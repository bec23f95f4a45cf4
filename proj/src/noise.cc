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

#include "dperm/noise.h"

#include <cmath>
#include <string>

#include "dperm/errors.h"

namespace dperm {

Eigen::VectorXd SampleDirection(int d, RngStream& rng) {
  if (d < 1) {
    throw InvalidArgument("direction dimension must be >= 1, got " +
                          std::to_string(d));
  }
  Eigen::VectorXd u(d);
  double norm = 0.0;
  // A zero Gaussian vector has probability zero; redraw if it happens.
  while (norm == 0.0) {
    for (int i = 0; i < d; ++i) u[i] = rng.Normal();
    norm = u.norm();
  }
  return u / norm;
}

double SampleRadius(int d, double theta, RngStream& rng) {
  if (d < 1) {
    throw InvalidArgument("Gamma shape must be >= 1, got " + std::to_string(d));
  }
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw InvalidArgument("Gamma scale must be positive, got " +
                          std::to_string(theta));
  }
  double radius = 0.0;
  for (int i = 0; i < d; ++i) radius += rng.Exponential(theta);
  return radius;
}

Eigen::VectorXd SampleNoise(const NoiseParams& params, RngStream& rng) {
  if (!(params.beta > 0.0)) {
    throw InvalidArgument("noise beta must be positive, got " +
                          std::to_string(params.beta));
  }
  Eigen::VectorXd direction = SampleDirection(params.dimension, rng);
  const double radius = SampleRadius(params.dimension, 1.0 / params.beta, rng);
  return radius * direction;
}

}  // namespace dperm
