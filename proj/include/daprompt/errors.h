// Copyright 2026 The DAPrompt Authors.
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

#ifndef DAPROMPT_ERRORS_H_
#define DAPROMPT_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace daprompt {

// Malformed input file. `line()` is 1-based, 0 when not line-addressable.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structurally valid data that violates a domain invariant.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InstanceTooLongError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a precondition (out-of-range probability, misaligned lists).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace daprompt

#endif  // DAPROMPT_ERRORS_H_
