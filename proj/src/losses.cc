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

#include "dperm/losses.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dperm/errors.h"

namespace dperm {
namespace {

void CheckFinite(double z) {
  if (!std::isfinite(z)) {
    throw InvalidArgument("loss evaluated at a non-finite margin");
  }
}

void CheckSmoothing(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidArgument("smoothing width h must be positive, got " +
                          std::to_string(h));
  }
}

}  // namespace

LossSpec LossSpec::Logistic() { return LossSpec(LossKind::kLogistic, 0.0); }

LossSpec LossSpec::Huber(double h) {
  CheckSmoothing(h);
  return LossSpec(LossKind::kHuber, h);
}

LossSpec LossSpec::SmoothedHinge(double h) {
  CheckSmoothing(h);
  return LossSpec(LossKind::kSmoothedHinge, h);
}

LossSpec LossSpec::FromName(std::string_view name, double h) {
  if (name == "logistic") return Logistic();
  if (name == "huber") return Huber(h);
  if (name == "smoothed_hinge" || name == "smoothed-hinge") {
    return SmoothedHinge(h);
  }
  throw InvalidArgument("unknown loss '" + std::string(name) + "'");
}

std::string_view LossSpec::name() const {
  switch (kind_) {
    case LossKind::kLogistic:
      return "logistic";
    case LossKind::kHuber:
      return "huber";
    case LossKind::kSmoothedHinge:
      return "smoothed_hinge";
  }
  return "unknown";
}

double LossSpec::curvature_bound() const {
  switch (kind_) {
    case LossKind::kLogistic:
      return 0.25;
    case LossKind::kHuber:
      return 1.0 / (2.0 * h_);
    case LossKind::kSmoothedHinge:
      return 3.0 / (4.0 * h_);
  }
  return 0.0;
}

double LossSpec::Value(double z) const {
  CheckFinite(z);
  switch (kind_) {
    case LossKind::kLogistic:
      // log(1 + e^-z) without overflow for large |z|.
      return std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    case LossKind::kHuber: {
      if (z > 1.0 + h_) return 0.0;
      if (z < 1.0 - h_) return 1.0 - z;
      const double t = 1.0 + h_ - z;
      return t * t / (4.0 * h_);
    }
    case LossKind::kSmoothedHinge: {
      if (z > 1.0 + h_) return 0.0;
      if (z < 1.0 - h_) return 1.0 - z;
      const double u = 1.0 - z;
      const double u2 = u * u;
      return -u2 * u2 / (16.0 * h_ * h_ * h_) + 3.0 * u2 / (8.0 * h_) +
             u / 2.0 + 3.0 * h_ / 16.0;
    }
  }
  return 0.0;
}

double LossSpec::Derivative(double z) const {
  CheckFinite(z);
  switch (kind_) {
    case LossKind::kLogistic: {
      // -1 / (1 + e^z)
      if (z >= 0.0) {
        const double e = std::exp(-z);
        return -e / (1.0 + e);
      }
      return -1.0 / (1.0 + std::exp(z));
    }
    case LossKind::kHuber:
      if (z > 1.0 + h_) return 0.0;
      if (z < 1.0 - h_) return -1.0;
      return -(1.0 + h_ - z) / (2.0 * h_);
    case LossKind::kSmoothedHinge: {
      if (z > 1.0 + h_) return 0.0;
      if (z < 1.0 - h_) return -1.0;
      const double u = 1.0 - z;
      return u * u * u / (4.0 * h_ * h_ * h_) - 3.0 * u / (4.0 * h_) - 0.5;
    }
  }
  return 0.0;
}

double LossSpec::SecondDerivative(double z) const {
  CheckFinite(z);
  switch (kind_) {
    case LossKind::kLogistic: {
      const double e = std::exp(-std::abs(z));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case LossKind::kHuber:
      if (z > 1.0 + h_ || z < 1.0 - h_) return 0.0;
      return 1.0 / (2.0 * h_);
    case LossKind::kSmoothedHinge: {
      if (z > 1.0 + h_ || z < 1.0 - h_) return 0.0;
      const double u = 1.0 - z;
      // Clamp the roundoff at the knots, where the exact value is 0.
      return std::max(0.0, -3.0 * u * u / (4.0 * h_ * h_ * h_) +
                               3.0 / (4.0 * h_));
    }
  }
  return 0.0;
}

}  // namespace dperm
