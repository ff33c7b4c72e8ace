// Copyright 2026 The phononwalk Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace phononwalk {

/// Invalid argument, out-of-range index, or violated precondition.
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative solver gave up before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string &what, double residual)
        : std::runtime_error(what), residual_(residual)
    {
    }
    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

/// Data carries no information about the quantity being estimated.
class DegenerateDataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed scenario or data file. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string &what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line)
    {
    }
    int line() const noexcept { return line_; }

  private:
    int line_;
};

} // namespace phononwalk
