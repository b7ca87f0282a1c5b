// Copyright 2026 The Arbo Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace arbo {

// Base of every exception thrown by the library. The CLI maps the two
// families below onto its exit codes: InputError -> 2, DomainError -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something malformed: wrong shape, unknown feature,
// bad flag value, unreadable file.
class InputError : public Error {
 public:
  using Error::Error;
};

// Inputs were well formed but the requested operation cannot succeed on them.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};

class MalformedDocumentError : public InputError {
 public:
  using InputError::InputError;
};

class UnknownVersionError : public InputError {
 public:
  using InputError::InputError;
};

// A row of a dataset failed to parse or did not match the schema.
class RowError : public InputError {
 public:
  RowError(std::size_t row, const std::string& what)
      : InputError("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// compile() on a tree without internal nodes.
class DegenerateTreeError : public DomainError {
 public:
  DegenerateTreeError() : DomainError("degenerate: no internal nodes") {}
};

class UnsupportedFormError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Raised by the structure decoder. Carries the violated rule id (1..4) and
// the offending column/row indices.
class InvalidStructureError : public DomainError {
 public:
  InvalidStructureError(int rule, const std::string& what, std::vector<int> columns = {},
                        std::vector<int> rows = {})
      : DomainError("rule " + std::to_string(rule) + ": " + what),
        rule_(rule),
        message_(what),
        columns_(std::move(columns)),
        rows_(std::move(rows)) {}
  int rule() const { return rule_; }
  const std::string& message() const { return message_; }
  const std::vector<int>& columns() const { return columns_; }
  const std::vector<int>& rows() const { return rows_; }

 private:
  int rule_;
  std::string message_;
  std::vector<int> columns_;
  std::vector<int> rows_;
};

// A loaded tuple document whose B matrix is not a structure matrix.
class ValidatorFailureError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Backends produced different results on the same input.
class BackendDisagreementError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace arbo
