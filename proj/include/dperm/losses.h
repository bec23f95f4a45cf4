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

#ifndef DPERM_LOSSES_H_
#define DPERM_LOSSES_H_

#include <string>
#include <string_view>

namespace dperm {

enum class LossKind { kLogistic, kHuber, kSmoothedHinge };

// Smoothing half-width used when none is given.
inline constexpr double kDefaultSmoothing = 0.5;

// A margin loss l(z), z = y * f'x, together with the certified constants the
// privacy analysis relies on: sup |l'(z)| and sup |l''(z)|.
//
//   logistic        log(1 + e^-z)                        c = 1/4
//   huber(h)        0 / (1+h-z)^2 / (4h) / 1-z           c = 1/(2h)
//   smoothed_hinge  0 / quartic blend on |1-z|<=h / 1-z  c = 3/(4h)
//
// Huber is only C^1; at the knots z = 1 +- h the quadratic branch is used
// for both derivatives.
class LossSpec {
 public:
  static LossSpec Logistic();
  static LossSpec Huber(double h = kDefaultSmoothing);
  static LossSpec SmoothedHinge(double h = kDefaultSmoothing);
  // Accepts "logistic", "huber", "smoothed_hinge" (also "smoothed-hinge").
  static LossSpec FromName(std::string_view name, double h = kDefaultSmoothing);

  LossKind kind() const { return kind_; }
  // Smoothing half-width; 0 for logistic.
  double h() const { return h_; }
  std::string_view name() const;

  double Value(double z) const;
  double Derivative(double z) const;
  double SecondDerivative(double z) const;

  double derivative_bound() const { return 1.0; }
  double curvature_bound() const;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;

 private:
  LossSpec(LossKind kind, double h) : kind_(kind), h_(h) {}

  LossKind kind_;
  double h_;
};

}  // namespace dperm

#endif  // DPERM_LOSSES_H_
