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

#include "dpbayes/accountant.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "dpbayes/errors.hpp"
#include "json.hpp"

namespace dpbayes {

namespace {

void validate_cost(const PrivacyCost& c) {
  if (!(c.epsilon >= 0.0)) {
    throw std::domain_error("PrivacyCost: epsilon must be >= 0");
  }
  if (!(c.delta >= 0.0 && c.delta <= 1.0)) {
    throw std::domain_error("PrivacyCost: delta must lie in [0, 1]");
  }
}

}  // namespace

PrivacyCost compose_sequential(const std::vector<PrivacyCost>& costs) {
  PrivacyCost out;
  for (const auto& c : costs) {
    out.epsilon += c.epsilon;
    out.delta += c.delta;
  }
  out.delta = std::min(out.delta, 1.0);
  return out;
}

PrivacyCost compose_parallel(const std::vector<PrivacyCost>& costs) {
  PrivacyCost out;
  for (const auto& c : costs) {
    out.epsilon = std::max(out.epsilon, c.epsilon);
    out.delta = std::max(out.delta, c.delta);
  }
  return out;
}

PrivacyCost amplify_random_scan(double delta_log, std::int64_t q,
                                std::int64_t n) {
  if (!(delta_log > 0.0)) {
    throw std::domain_error("amplify_random_scan: delta_log must be > 0");
  }
  if (n <= 0 || q < 0 || q > n) {
    throw std::domain_error("amplify_random_scan: require 0 <= q <= n, n > 0");
  }
  return PrivacyCost{4.0 * delta_log * static_cast<double>(q) /
                         static_cast<double>(n),
                     0.0};
}

void Ledger::charge(std::string label, PrivacyCost cost,
                    bool delta_estimated) {
  validate_cost(cost);
  entries_.push_back(
      LedgerEntry{std::move(label), cost, std::nullopt, delta_estimated});
}

void Ledger::charge_parallel(std::string label, std::string group,
                             PrivacyCost cost, bool delta_estimated) {
  validate_cost(cost);
  if (group.empty() || group == "sequential") {
    // "sequential" is the serialized marker for non-grouped entries.
    throw std::invalid_argument("Ledger: invalid parallel group id");
  }
  entries_.push_back(LedgerEntry{std::move(label), cost, std::move(group),
                                 delta_estimated});
}

PrivacyCost Ledger::total() const {
  // Sum in entry order so repeated totals of the same ledger are bit
  // identical; each parallel group is folded in once, where it first appears.
  PrivacyCost out;
  std::set<std::string> groups_done;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const LedgerEntry& e = entries_[i];
    PrivacyCost contribution;
    if (!e.parallel_group) {
      contribution = e.cost;
    } else {
      if (groups_done.count(*e.parallel_group) != 0) continue;
      groups_done.insert(*e.parallel_group);
      for (std::size_t j = i; j < entries_.size(); ++j) {
        const LedgerEntry& f = entries_[j];
        if (f.parallel_group && *f.parallel_group == *e.parallel_group) {
          contribution.epsilon = std::max(contribution.epsilon, f.cost.epsilon);
          contribution.delta = std::max(contribution.delta, f.cost.delta);
        }
      }
    }
    out.epsilon += contribution.epsilon;
    out.delta += contribution.delta;
  }
  out.delta = std::min(out.delta, 1.0);
  return out;
}

bool Ledger::has_estimated_delta() const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [](const LedgerEntry& e) { return e.delta_estimated; });
}

void Ledger::assert_within(const PrivacyCost& budget) const {
  const PrivacyCost t = total();
  if (t.epsilon > budget.epsilon || t.delta > budget.delta) {
    std::ostringstream msg;
    msg << "privacy budget exceeded: spent (" << t.epsilon << ", " << t.delta
        << ") vs budget (" << budget.epsilon << ", " << budget.delta << ")";
    throw BudgetExceededError(msg.str());
  }
}

std::string Ledger::to_json_string(int indent) const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : entries_) {
    nlohmann::json j{{"label", e.label},
                     {"epsilon", e.cost.epsilon},
                     {"delta", e.cost.delta},
                     {"group", e.parallel_group ? nlohmann::json(*e.parallel_group)
                                                : nlohmann::json("sequential")},
                     {"delta_estimated", e.delta_estimated}};
    entries.push_back(std::move(j));
  }
  const PrivacyCost t = total();
  nlohmann::json doc{
      {"entries", std::move(entries)},
      {"total", {{"epsilon", t.epsilon}, {"delta", t.delta}}},
      {"delta_estimated", has_estimated_delta()}};
  return doc.dump(indent);
}

Ledger Ledger::from_json_string(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  Ledger out;
  for (const auto& j : doc.at("entries")) {
    LedgerEntry e;
    e.label = j.at("label").get<std::string>();
    e.cost.epsilon = j.at("epsilon").get<double>();
    e.cost.delta = j.at("delta").get<double>();
    const std::string group = j.at("group").get<std::string>();
    if (group != "sequential") e.parallel_group = group;
    e.delta_estimated = j.at("delta_estimated").get<bool>();
    out.entries_.push_back(std::move(e));
  }
  return out;
}

}  // namespace dpbayes
