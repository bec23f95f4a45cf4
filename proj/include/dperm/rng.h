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

#ifndef DPERM_RNG_H_
#define DPERM_RNG_H_

#include <cstdint>
#include <random>

namespace dperm {

// Seedable, splittable random stream. Every randomized operation takes an
// explicit stream; there is no global generator. Child streams derived with
// Split() are a pure function of (seed, stream path, child id), so parallel
// schedules that hand out children by index reproduce serial results.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream_id = 0);

  RngStream Split(uint64_t child) const;

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  double Normal();
  double Exponential(double mean);
  uint64_t Next() { return engine_(); }
  // Uniform integer in [0, n).
  uint64_t UniformIndex(uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  uint64_t seed_;
  uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace dperm

#endif  // DPERM_RNG_H_
