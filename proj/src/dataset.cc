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

#include "dperm/dataset.h"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "dperm/errors.h"

namespace dperm {
namespace {

void CheckRow(const Eigen::Ref<const Eigen::RowVectorXd>& x, double label,
              std::size_t index) {
  if (label != 1.0 && label != -1.0) {
    std::ostringstream msg;
    msg << "example " << index << ": label must be -1 or +1, got " << label;
    throw PreconditionError(msg.str());
  }
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "example " << index << ": non-finite feature";
    throw PreconditionError(msg.str());
  }
  const double norm = x.norm();
  if (norm > 1.0 + kNormSlack) {
    std::ostringstream msg;
    msg << "example " << index << ": ||x|| = " << norm
        << " exceeds 1; rescale during preprocessing";
    throw PreconditionError(msg.str());
  }
}

}  // namespace

void ValidateExample(const Example& example, int dimension) {
  if (example.features.size() != dimension) {
    std::ostringstream msg;
    msg << "example has dimension " << example.features.size()
        << ", expected " << dimension;
    throw PreconditionError(msg.str());
  }
  CheckRow(example.features.transpose(), example.label, 0);
}

Dataset::Dataset(int dimension)
    : dimension_(dimension), features_(0, dimension), labels_(0) {
  if (dimension < 1) throw InvalidArgument("dataset dimension must be >= 1");
}

Dataset::Dataset(RowMatrix features, Eigen::VectorXd labels)
    : dimension_(static_cast<int>(features.cols())),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  if (dimension_ < 1) throw InvalidArgument("dataset dimension must be >= 1");
  if (features_.rows() != labels_.size()) {
    throw InvalidArgument("feature rows and labels differ in length");
  }
  for (Eigen::Index i = 0; i < features_.rows(); ++i) {
    CheckRow(features_.row(i), labels_[i], static_cast<std::size_t>(i));
  }
}

Dataset Dataset::FromExamples(const std::vector<Example>& examples,
                              int dimension) {
  RowMatrix x(static_cast<Eigen::Index>(examples.size()), dimension);
  Eigen::VectorXd y(static_cast<Eigen::Index>(examples.size()));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].features.size() != dimension) {
      std::ostringstream msg;
      msg << "example " << i << " has dimension " << examples[i].features.size()
          << ", expected " << dimension;
      throw PreconditionError(msg.str());
    }
    x.row(static_cast<Eigen::Index>(i)) = examples[i].features.transpose();
    y[static_cast<Eigen::Index>(i)] = examples[i].label;
  }
  return Dataset(std::move(x), std::move(y));
}

Example Dataset::example(std::size_t i) const {
  const auto row = static_cast<Eigen::Index>(i);
  return Example{features_.row(row).transpose(), labels_[row]};
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  RowMatrix x(static_cast<Eigen::Index>(indices.size()), dimension_);
  Eigen::VectorXd y(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size()) throw InvalidArgument("subset index out of range");
    const auto src = static_cast<Eigen::Index>(indices[k]);
    x.row(static_cast<Eigen::Index>(k)) = features_.row(src);
    y[static_cast<Eigen::Index>(k)] = labels_[src];
  }
  Dataset out(dimension_);
  out.features_ = std::move(x);
  out.labels_ = std::move(y);
  return out;
}

Dataset Dataset::WithReplaced(std::size_t index,
                              const Example& replacement) const {
  if (index >= size()) throw InvalidArgument("replacement index out of range");
  ValidateExample(replacement, dimension_);
  Dataset out = *this;
  out.features_.row(static_cast<Eigen::Index>(index)) =
      replacement.features.transpose();
  out.labels_[static_cast<Eigen::Index>(index)] = replacement.label;
  return out;
}

Dataset Dataset::Concat(const Dataset& other) const {
  if (other.dimension_ != dimension_) {
    throw InvalidArgument("cannot concatenate datasets of different dimension");
  }
  Dataset out(dimension_);
  const Eigen::Index n = features_.rows();
  const Eigen::Index m = other.features_.rows();
  out.features_.resize(n + m, dimension_);
  out.features_.topRows(n) = features_;
  out.features_.bottomRows(m) = other.features_;
  out.labels_.resize(n + m);
  out.labels_.head(n) = labels_;
  out.labels_.tail(m) = other.labels_;
  return out;
}

std::size_t Dataset::CountLabel(double label) const {
  return static_cast<std::size_t>((labels_.array() == label).count());
}

}  // namespace dperm
