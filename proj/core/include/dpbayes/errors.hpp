// Copyright 2026 The dpbayes Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPBAYES_ERRORS_HPP_
#define DPBAYES_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dpbayes {

// Raised when a mechanism is asked to privatize a quantity whose sensitivity
// is unbounded (e.g. an unbounded sufficient statistic, or an exponential
// mechanism on an untruncated support).
class UnboundedSensitivityError : public std::domain_error {
 public:
  explicit UnboundedSensitivityError(const std::string& what)
      : std::domain_error(what) {}
};

// Raised by Ledger::assert_within when the composed total exceeds the budget.
class BudgetExceededError : public std::runtime_error {
 public:
  explicit BudgetExceededError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace dpbayes

#endif  // DPBAYES_ERRORS_HPP_
