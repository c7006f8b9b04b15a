// Copyright 2026 The dpbayes Authors
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

#ifndef DPBAYES_EVENTS_HPP_
#define DPBAYES_EVENTS_HPP_

#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dpbayes/hmm.hpp"
#include "dpbayes/rng.hpp"

namespace dpbayes {

// One event-log entry: a region label, a month index, and D categorical
// feature outcomes (encoded as indices into the owning table's vocabulary).
struct EventRecord {
  std::string region;
  int timestep = 0;  // Nonnegative month index.
  std::vector<int> features;
};

// A parsed event-log table. Feature columns carry a token vocabulary
// (vocab[d][j] is the token encoded as outcome j); columns whose tokens are
// all nonnegative integers are canonicalized so that outcome j is the token
// "j" (making CSV round trips of count tensors exact).
struct EventTable {
  std::vector<EventRecord> records;
  std::vector<std::string> feature_names;
  std::vector<int> feature_dims;
  std::vector<std::vector<std::string>> feature_vocab;
  // Parse/processing log: new-value assignments, empty-input warnings, drops.
  std::vector<std::string> messages;
  // Per-(region, timestep) record counts, sorted by (region, timestep).
  std::vector<std::tuple<std::string, int, int>> cell_counts;

  int n_features() const { return static_cast<int>(feature_names.size()); }
};

// Loads a CSV with header `region,timestep,f1,...,fD`. A feature column
// token may carry a declared domain size as `name:K` (outcomes 0..K-1);
// values outside a declared domain are appended as new indices and logged.
// Throws std::runtime_error naming the line for malformed rows and for a
// missing/invalid header.
EventTable load_events_csv(const std::string& path);

struct PreprocessRules {
  // Columns to binarize (outcome value 0 stays 0, anything > 0 becomes 1).
  std::vector<std::string> binarize;
  // Each entry merges the listed source columns disjunctively into one new
  // indicator column (1 when any source is positive); sources are removed.
  std::vector<std::pair<std::string, std::vector<std::string>>>
      merge_disjunctive;
  // Drop timesteps with no records anywhere, compacting the month axis.
  bool drop_empty_timesteps = false;
  // Drop regions with fewer records than this (0 disables the rule).
  int min_region_records = 0;
};

// Applies binarization, disjunctive merges, and the drop rules, in that
// order. Every action is appended to the returned table's messages. A rule
// referencing an unknown column throws std::invalid_argument.
EventTable preprocess(const EventTable& table, const PreprocessRules& rules);

// Synthetic data in the event-log schema, drawn from the model's generative
// process: transition rows ~ Dirichlet(alpha) (including the dummy row),
// theta ~ Dirichlet(beta), z chains from the dummy initial state, and
// n_per_cell records per cell. Explicit parameters override the prior draws;
// the convenience knobs build well-separated parameters instead.
struct SynthConfig {
  HmmConfig model;
  int n_regions = 1;
  int n_timesteps = 10;
  int n_per_cell = 100;
  // Explicit (K+1) x K transition rows (row 0 = dummy) and [k][d][j]
  // emission tables.
  std::optional<std::vector<std::vector<double>>> trans;
  std::optional<std::vector<std::vector<std::vector<double>>>> theta;
  // Self-transition probability: A = s*I + (1-s)/(K-1) off the diagonal,
  // uniform dummy row. Ignored when `trans` is given.
  std::optional<double> self_transition;
  // Peak emission mass: theta^(k,d) puts this mass on outcome (k-1+d) mod
  // K_d and spreads the rest uniformly. Ignored when `theta` is given.
  std::optional<double> emission_peak;

  void validate() const;  // throws std::invalid_argument
};

struct SynthResult {
  EventTable events;
  // Ground-truth states, shaped like HmmState::z (dummy slot at t = 0).
  std::vector<std::vector<int>> z;
  std::vector<std::string> regions;
  std::vector<std::vector<double>> trans;
  std::vector<std::vector<std::vector<double>>> theta;
};

SynthResult synth_generate(const SynthConfig& config, Rng& rng);

// Writers for the two synth outputs. Events: the load_events_csv schema with
// declared feature domains; z: header `region,timestep,state`.
void write_events_csv(const EventTable& table, const std::string& path);
void write_z_csv(const std::vector<std::vector<int>>& z,
                 const std::vector<std::string>& regions,
                 const std::string& path);

// An event table bundled into the dense (region, timestep) count tensor the
// hmm module consumes. Regions are indexed in order of first appearance;
// cell t = 1 corresponds to month `first_timestep`, and months with no
// records inside the observed range become zero-count cells.
struct HmmDataset {
  HmmData data;
  std::vector<std::string> regions;
  int first_timestep = 0;
};

HmmDataset make_hmm_dataset(const EventTable& table);

}  // namespace dpbayes

#endif  // DPBAYES_EVENTS_HPP_
