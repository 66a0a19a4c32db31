// Copyright 2026 The safepark Authors
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

namespace safepark {

// Polar coordinates are undefined at (or numerically too close to) the origin.
class DegeneratePose : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A QP instance the theory excludes, e.g. a vanishing CLF gradient with a
// nonnegative drift term.
class DegenerateQp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoFeasibleActiveSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsafeStart : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace safepark
