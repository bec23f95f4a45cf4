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

#include "dperm/kernel_features.h"

#include "dperm/errors.h"

namespace dperm {

TrainedModel TrainKernelPrivate(const Dataset& data, const LossSpec& loss,
                                double lambda, double epsilon_p,
                                const KernelOptions& kernel, Method method,
                                RngStream& rng, const SolverOptions& solver) {
  if (data.empty()) throw PreconditionError("cannot train on an empty dataset");
  // The map is drawn before the data is touched, from the head of the stream.
  RandomFeatureMap map = SampleGaussianFeatures(
      data.dimension(), kernel.features, kernel.gamma, rng, kernel.norm_mode);
  const Dataset mapped = map.Apply(data);
  TrainedModel model = Train(method, mapped, loss, lambda, epsilon_p, rng, solver);
  model.seed = rng.seed();
  model.feature_map = std::move(map);
  return model;
}

}  // namespace dperm
