// Copyright 2026 The HPL Authors
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

#ifndef HPL_ERRORS_HPP
#define HPL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hpl {

// Violated precondition: wrong shapes, out-of-range indices, bad sizes.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mathematically degenerate input, e.g. a zero-norm embedding or proxy.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Training diverged (non-finite loss or gradient).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed dataset record. `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that breaks a data invariant (e.g. label gaps).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kCorrupt, kVersion };
  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace hpl

#endif  // HPL_ERRORS_HPP
