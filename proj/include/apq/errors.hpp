// Copyright 2026 The APQ Search Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef APQ_ERRORS_HPP_
#define APQ_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace apq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// enumerate() refuses spaces larger than the caller's limit; `count` is the
// exact joint cardinality as a decimal string (it routinely exceeds 64 bits).
class CardinalityOverflowError : public Error {
 public:
  CardinalityOverflowError(std::string message, std::string count)
      : Error(std::move(message)), count_(std::move(count)) {}
  const std::string& count() const { return count_; }

 private:
  std::string count_;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class MalformedEncodingError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(std::string message, int epoch)
      : Error(std::move(message)), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class DegenerateTestSetError : public Error {
 public:
  using Error::Error;
};

class CorruptFileError : public Error {
 public:
  using Error::Error;
};

class MissingKeyError : public Error {
 public:
  using Error::Error;
};

class MissingSpatialMetadataError : public Error {
 public:
  using Error::Error;
};

class EmptyTensorError : public Error {
 public:
  using Error::Error;
};

class DegenerateTensorError : public Error {
 public:
  using Error::Error;
};

class BinCountMismatchError : public Error {
 public:
  using Error::Error;
};

class InfeasibleConstraintError : public Error {
 public:
  using Error::Error;
};

class MutationStuckError : public Error {
 public:
  using Error::Error;
};

class CrossoverStuckError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace apq

#endif  // APQ_ERRORS_HPP_
