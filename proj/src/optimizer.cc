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

#include "dperm/optimizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "dperm/errors.h"

namespace dperm {
namespace {

// Below this relative size a predicted decrease is lost in the roundoff of
// the objective value, and the Armijo test stops being informative.
constexpr double kValueResolution = 1e-13;

void CheckFinite(double value, const Eigen::VectorXd& gradient, long iter) {
  if (!std::isfinite(value) || !gradient.allFinite()) {
    std::ostringstream msg;
    msg << "objective or gradient is not finite at iteration " << iter;
    throw InvalidArgument(msg.str());
  }
}

struct Point {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
};

Point EvaluateAt(const Objective& objective, Eigen::VectorXd x, long iter) {
  Point p;
  p.x = std::move(x);
  p.value = objective.Evaluate(p.x, &p.gradient);
  CheckFinite(p.value, p.gradient, iter);
  return p;
}

// Sufficient decrease for the step x+ = y - g(y)/L. Uses the Armijo condition
// f(x+) <= f(y) - ||g(y)||^2 / (2L) while that decrease is resolvable in
// floating point, and the equivalent local Lipschitz test
// ||g(x+) - g(y)|| <= L ||x+ - y|| once it is not.
bool SufficientDecrease(const Point& from, const Point& to, double lipschitz) {
  const double predicted = from.gradient.squaredNorm() / (2.0 * lipschitz);
  const double resolution =
      kValueResolution * std::max(1.0, std::abs(from.value));
  if (predicted > resolution) {
    return to.value <= from.value - 0.5 * predicted;
  }
  const double step = (to.x - from.x).norm();
  return (to.gradient - from.gradient).norm() <= lipschitz * step * (1.0 + 1e-12);
}

}  // namespace

Eigen::VectorXd Objective::Gradient(const Eigen::VectorXd& point) const {
  Eigen::VectorXd g;
  Evaluate(point, &g);
  return g;
}

FunctionObjective::FunctionObjective(int dimension, double strong_convexity,
                                     ValueFn value, GradientFn gradient)
    : dimension_(dimension),
      strong_convexity_(strong_convexity),
      value_(std::move(value)),
      gradient_(std::move(gradient)) {
  if (dimension < 1) throw InvalidArgument("objective dimension must be >= 1");
  if (!(strong_convexity > 0.0)) {
    throw InvalidArgument("strong convexity modulus must be positive");
  }
}

double FunctionObjective::Evaluate(const Eigen::VectorXd& point,
                                   Eigen::VectorXd* gradient) const {
  if (gradient != nullptr) *gradient = gradient_(point);
  return value_(point);
}

double EffectiveTolerance(const Objective& objective,
                          const SolverOptions& options) {
  if (!(options.grad_tol > 0.0)) {
    throw InvalidArgument("grad_tol must be positive");
  }
  if (!options.relative_tolerance) return options.grad_tol;
  const Eigen::VectorXd g0 =
      objective.Gradient(Eigen::VectorXd::Zero(objective.dimension()));
  return options.grad_tol * std::max(1.0, g0.norm());
}

SolverResult Minimize(const Objective& objective,
                      const SolverOptions& options) {
  if (options.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  const double mu = objective.strong_convexity();
  if (!(mu > 0.0)) {
    throw InvalidArgument("objective must be strongly convex");
  }

  Point x = EvaluateAt(objective, Eigen::VectorXd::Zero(objective.dimension()), 0);
  SolverResult result;
  result.tolerance = options.relative_tolerance
                         ? options.grad_tol * std::max(1.0, x.gradient.norm())
                         : options.grad_tol;
  if (!(result.tolerance > 0.0)) {
    throw InvalidArgument("grad_tol must be positive");
  }

  double lipschitz = std::max(mu, 1.0);
  Point y = x;
  bool y_is_x = true;
  long iter = 0;
  while (true) {
    const double gnorm = x.gradient.norm();
    if (gnorm <= result.tolerance) {
      result.converged = true;
      break;
    }
    if (iter >= options.max_iters) {
      if (options.throw_on_failure) {
        std::ostringstream msg;
        msg << "solver did not reach gradient norm " << result.tolerance
            << " within " << options.max_iters
            << " iterations (final gradient norm " << gnorm << ")";
        throw NotConverged(msg.str(), gnorm, iter);
      }
      break;
    }
    ++iter;

    // Backtracking on the Lipschitz estimate.
    Point next;
    while (true) {
      next = EvaluateAt(objective, y.x - y.gradient / lipschitz, iter);
      if (SufficientDecrease(y, next, lipschitz)) break;
      lipschitz *= 2.0;
      if (!std::isfinite(lipschitz)) {
        throw InvalidArgument("line search failed: step size underflow");
      }
    }

    if (options.accelerated && !y_is_x && next.value > x.value) {
      // Momentum overshot: restart from x with a plain gradient step.
      y = x;
      y_is_x = true;
      continue;
    }

    if (options.accelerated) {
      const double q = std::sqrt(std::min(1.0, mu / lipschitz));
      const double momentum = (1.0 - q) / (1.0 + q);
      Eigen::VectorXd extrapolated = next.x + momentum * (next.x - x.x);
      x = std::move(next);
      y = EvaluateAt(objective, std::move(extrapolated), iter);
      y_is_x = momentum == 0.0;
    } else {
      x = std::move(next);
      y = x;
    }
    lipschitz = std::max(mu, 0.9 * lipschitz);
  }

  result.minimizer = std::move(x.x);
  result.gradient_norm = x.gradient.norm();
  result.iterations = iter;
  return result;
}

double CheckGradient(const Objective& objective, const Eigen::VectorXd& point,
                     double step) {
  const Eigen::VectorXd analytic = objective.Gradient(point);
  double worst = 0.0;
  Eigen::VectorXd probe = point;
  for (int i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + step;
    const double up = objective.Value(probe);
    probe[i] = point[i] - step;
    const double down = objective.Value(probe);
    probe[i] = point[i];
    const double numeric = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(numeric - analytic[i]));
  }
  return worst;
}

}  // namespace dperm
