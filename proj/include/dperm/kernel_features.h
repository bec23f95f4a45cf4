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

#ifndef DPERM_KERNEL_FEATURES_H_
#define DPERM_KERNEL_FEATURES_H_

#include "dperm/dataset.h"
#include "dperm/erm.h"
#include "dperm/losses.h"
#include "dperm/random_features.h"
#include "dperm/rng.h"

namespace dperm {

struct KernelOptions {
  int features = 500;
  double gamma = 1.0;
  NormMode norm_mode = NormMode::kRescaleHalf;
};

// Private ERM for the Gaussian kernel: sample a random feature map
// independently of the data, map every example, and run the linear trainer
// selected by `method` on the mapped data. The returned model carries the
// map, which is part of the released output.
TrainedModel TrainKernelPrivate(const Dataset& data, const LossSpec& loss,
                                double lambda, double epsilon_p,
                                const KernelOptions& kernel, Method method,
                                RngStream& rng,
                                const SolverOptions& solver = {});

}  // namespace dperm

#endif  // DPERM_KERNEL_FEATURES_H_
