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

#ifndef DPERM_NOISE_H_
#define DPERM_NOISE_H_

#include <Eigen/Dense>

#include "dperm/rng.h"

namespace dperm {

// Parameters of the vector noise density proportional to exp(-beta * ||b||).
struct NoiseParams {
  int dimension = 1;
  double beta = 1.0;
};

// Uniform direction on the unit sphere in R^d (normalized Gaussian vector).
Eigen::VectorXd SampleDirection(int d, RngStream& rng);

// Gamma(d, theta) for integer shape d, drawn as the sum of d exponentials of
// mean theta.
double SampleRadius(int d, double theta, RngStream& rng);

// b = r * u with r ~ Gamma(d, 1/beta) and u uniform on the sphere; b then
// has density proportional to exp(-beta * ||b||).
Eigen::VectorXd SampleNoise(const NoiseParams& params, RngStream& rng);

}  // namespace dperm

#endif  // DPERM_NOISE_H_
