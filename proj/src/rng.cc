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

#include "dperm/rng.h"

#include <cmath>

namespace dperm {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 MakeEngine(uint64_t seed, uint64_t stream_id) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(stream_id),
                    static_cast<uint32_t>(stream_id >> 32), 0x64706572u};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(MakeEngine(seed, stream_id)) {}

RngStream RngStream::Split(uint64_t child) const {
  return RngStream(seed_, SplitMix64(stream_id_ ^ SplitMix64(child + 1)));
}

double RngStream::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::Normal() { return normal_(engine_); }

double RngStream::Exponential(double mean) {
  return -mean * std::log1p(-Uniform());
}

uint64_t RngStream::UniformIndex(uint64_t n) {
  std::uniform_int_distribution<uint64_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace dperm
