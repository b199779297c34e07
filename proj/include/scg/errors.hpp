// Copyright 2026 The scgossip Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based; 0 means "not line specific".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// A consensus run produced a non-finite or exploding error metric.
class DivergenceError : public Error {
 public:
  DivergenceError(long round, const std::string& what)
      : Error("diverged at round " + std::to_string(round) + ": " + what),
        round_(round) {}
  long round() const noexcept { return round_; }

 private:
  long round_;
};

}  // namespace scg
