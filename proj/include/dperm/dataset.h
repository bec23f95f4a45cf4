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

#ifndef DPERM_DATASET_H_
#define DPERM_DATASET_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dperm {

// Examples must lie in the unit ball up to this slack.
inline constexpr double kNormSlack = 1e-12;

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Example {
  Eigen::VectorXd features;
  double label = 1.0;
};

// Labeled examples with ||x|| <= 1 and y in {-1, +1}. Construction rejects
// anything else; scaling belongs to preprocessing, not here.
class Dataset {
 public:
  explicit Dataset(int dimension = 1);
  Dataset(RowMatrix features, Eigen::VectorXd labels);

  static Dataset FromExamples(const std::vector<Example>& examples,
                              int dimension);

  std::size_t size() const { return static_cast<std::size_t>(labels_.size()); }
  bool empty() const { return size() == 0; }
  int dimension() const { return dimension_; }

  const RowMatrix& features() const { return features_; }
  const Eigen::VectorXd& labels() const { return labels_; }
  Example example(std::size_t i) const;

  Dataset Subset(std::span<const std::size_t> indices) const;
  // Copy with example `index` replaced.
  Dataset WithReplaced(std::size_t index, const Example& replacement) const;
  // Concatenation of two datasets of equal dimension.
  Dataset Concat(const Dataset& other) const;

  std::size_t CountLabel(double label) const;

 private:
  int dimension_;
  RowMatrix features_;
  Eigen::VectorXd labels_;
};

// Throws PreconditionError unless the example is admissible for `dimension`.
void ValidateExample(const Example& example, int dimension);

}  // namespace dperm

#endif  // DPERM_DATASET_H_
