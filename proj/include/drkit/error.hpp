// Copyright 2026 The drkit Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace drkit {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside its admissible range (mask sizes, projection ranks).
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Two operands disagree on a dimension.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An experiment was configured in a way that cannot produce a result.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bad magic, version or dtype in a feature file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Payload length disagrees with the header.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or unparsable values in the data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Input too small or constant, so a statistic is undefined.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Probe optimisation produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace drkit
