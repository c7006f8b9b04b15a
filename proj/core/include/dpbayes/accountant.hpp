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

#ifndef DPBAYES_ACCOUNTANT_HPP_
#define DPBAYES_ACCOUNTANT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dpbayes {

// An (epsilon, delta) differential-privacy guarantee.
struct PrivacyCost {
  double epsilon = 0.0;
  double delta = 0.0;

  friend bool operator==(const PrivacyCost& a, const PrivacyCost& b) {
    return a.epsilon == b.epsilon && a.delta == b.delta;
  }
};

// Basic composition: componentwise sum; delta saturates at 1.
PrivacyCost compose_sequential(const std::vector<PrivacyCost>& costs);

// Parallel composition over mechanisms that touched disjoint records
// (caller-asserted): componentwise maximum.
PrivacyCost compose_parallel(const std::vector<PrivacyCost>& costs);

// Privacy amplification for a random scan updating q of n variables, each
// update touching one record: epsilon = 4 * delta_log * q / n, delta = 0.
// Throws std::domain_error unless 0 <= q <= n and n > 0 and delta_log > 0.
PrivacyCost amplify_random_scan(double delta_log, std::int64_t q,
                                std::int64_t n);

struct LedgerEntry {
  std::string label;
  PrivacyCost cost;
  // Empty: the entry composes sequentially with everything else.  Otherwise
  // the id of its parallel group; entries sharing a group id compose by max
  // (the caller asserts they touched disjoint records).
  std::optional<std::string> parallel_group;
  // The delta component is a Monte Carlo estimate, not a certified bound.
  bool delta_estimated = false;
};

// Append-only record of privacy charges for one experiment run.  The total
// is always recomputed from the entries: sequential entries contribute their
// cost directly, and each parallel group contributes its componentwise max
// once, at the position where the group first appears.
class Ledger {
 public:
  void charge(std::string label, PrivacyCost cost,
              bool delta_estimated = false);
  void charge_parallel(std::string label, std::string group, PrivacyCost cost,
                       bool delta_estimated = false);

  PrivacyCost total() const;

  // True iff any entry carries an estimated (uncertified) delta.
  bool has_estimated_delta() const;

  // Throws BudgetExceededError iff total().epsilon > budget.epsilon or
  // total().delta > budget.delta.
  void assert_within(const PrivacyCost& budget) const;

  const std::vector<LedgerEntry>& entries() const { return entries_; }

  // JSON report: entries with labels, groups, and costs, plus the composed
  // total.  Doubles are serialized round-trip exactly.
  std::string to_json_string(int indent = 2) const;
  static Ledger from_json_string(const std::string& text);

 private:
  std::vector<LedgerEntry> entries_;
};

}  // namespace dpbayes

#endif  // DPBAYES_ACCOUNTANT_HPP_
