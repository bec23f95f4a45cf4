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

#ifndef DPERM_OPTIMIZER_H_
#define DPERM_OPTIMIZER_H_

#include <functional>

#include <Eigen/Dense>

namespace dperm {

// A smooth objective with a known strong-convexity modulus.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual int dimension() const = 0;
  virtual double strong_convexity() const = 0;
  // Returns the value at `point`; writes the gradient when `gradient` is set.
  virtual double Evaluate(const Eigen::VectorXd& point,
                          Eigen::VectorXd* gradient) const = 0;

  double Value(const Eigen::VectorXd& point) const {
    return Evaluate(point, nullptr);
  }
  Eigen::VectorXd Gradient(const Eigen::VectorXd& point) const;
};

// Objective assembled from two callables; mostly for tests and small
// closed-form problems.
class FunctionObjective : public Objective {
 public:
  using ValueFn = std::function<double(const Eigen::VectorXd&)>;
  using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  FunctionObjective(int dimension, double strong_convexity, ValueFn value,
                    GradientFn gradient);

  int dimension() const override { return dimension_; }
  double strong_convexity() const override { return strong_convexity_; }
  double Evaluate(const Eigen::VectorXd& point,
                  Eigen::VectorXd* gradient) const override;

 private:
  int dimension_;
  double strong_convexity_;
  ValueFn value_;
  GradientFn gradient_;
};

struct SolverOptions {
  // Stopping threshold on the gradient norm. When `relative_tolerance` is set
  // the effective threshold is grad_tol * max(1, ||gradient at 0||).
  double grad_tol = 1e-10;
  bool relative_tolerance = true;
  long max_iters = 100000;
  // Nesterov momentum with function-value restarts; plain gradient descent
  // with Armijo backtracking otherwise.
  bool accelerated = true;
  // When false, running out of iterations returns the last iterate with
  // converged == false instead of throwing NotConverged.
  bool throw_on_failure = true;
};

struct SolverResult {
  Eigen::VectorXd minimizer;
  double gradient_norm = 0.0;
  // The absolute threshold that was applied.
  double tolerance = 0.0;
  long iterations = 0;
  bool converged = false;
};

// Absolute gradient-norm threshold implied by `options` for `objective`.
double EffectiveTolerance(const Objective& objective,
                          const SolverOptions& options);

// Minimizes a smooth strongly convex objective starting from the zero vector.
// On success ||gradient(minimizer)|| <= tolerance, which by strong convexity
// puts the minimizer within tolerance / strong_convexity of the exact argmin.
// Throws NotConverged (unless disabled) and InvalidArgument on NaN values.
SolverResult Minimize(const Objective& objective,
                      const SolverOptions& options = {});

// Largest absolute difference between the analytic gradient and a central
// finite difference with the given step.
double CheckGradient(const Objective& objective, const Eigen::VectorXd& point,
                     double step = 1e-6);

}  // namespace dperm

#endif  // DPERM_OPTIMIZER_H_
