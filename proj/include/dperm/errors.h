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

#ifndef DPERM_ERRORS_H_
#define DPERM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dperm {

// Error categories surfaced through the C API as status codes.
enum class ErrorCode {
  kInvalidArgument = 1,
  kPrecondition = 2,
  kNotConverged = 3,
  kIo = 4,
  kParse = 5,
  kInternal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error(ErrorCode::kInvalidArgument, message) {}
};

// A documented precondition of an operation does not hold (empty dataset,
// example outside the unit ball, too few rows for a split, ...).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message)
      : Error(ErrorCode::kPrecondition, message) {}
};

class NotConverged : public Error {
 public:
  NotConverged(const std::string& message, double gradient_norm,
               long iterations)
      : Error(ErrorCode::kNotConverged, message),
        gradient_norm_(gradient_norm),
        iterations_(iterations) {}
  double gradient_norm() const { return gradient_norm_; }
  long iterations() const { return iterations_; }

 private:
  double gradient_norm_;
  long iterations_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorCode::kIo, message) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error(ErrorCode::kParse, message) {}
};

}  // namespace dperm

#endif  // DPERM_ERRORS_H_
