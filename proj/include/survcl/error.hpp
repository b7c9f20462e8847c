// Copyright 2026 The survcl Authors.
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

namespace survcl {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not conform for the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numeric argument lies outside the domain of a function (log of a
/// non-positive value, negative chi-square statistic, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data are malformed, truncated or insufficient.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A metric or statistical test is undefined for the given inputs.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Task id refers to a head or router that has not been created.
class UnknownTaskError : public ContractError {
 public:
  using ContractError::ContractError;
};

}  // namespace survcl
