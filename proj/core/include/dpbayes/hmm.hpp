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

#ifndef DPBAYES_HMM_HPP_
#define DPBAYES_HMM_HPP_

#include <optional>
#include <string>
#include <vector>

#include "dpbayes/accountant.hpp"
#include "dpbayes/rng.hpp"

namespace dpbayes {

// Hidden Markov model over (region, timestep) cells with naive-Bayes discrete
// emissions per log entry, collapsed transition probabilities, and Gibbs
// inference in three modes (non-private, Laplace-privatized counts, OPS
// tempered updates).
//
// Conventions used throughout this module:
//   * Timesteps t run 1..T for observed cells. Latent state vectors carry an
//     extra slot t = 0 holding the dummy initial state.
//   * Latent states are labeled 1..K; state 0 is the dummy initial state that
//     only ever appears at t = 0.
//   * trans_counts is a (K+1) x K matrix indexed [source][destination-1] with
//     source in 0..K (row 0 = transitions out of the dummy state).

struct HmmConfig {
  int n_states = 1;   // K >= 1 (K = 1 is the naive Bayes special case).
  int n_features = 1; // D >= 1.
  // Outcome-vocabulary size K_d per feature; every entry must be >= 2.
  std::vector<int> feature_dims;
  double alpha = 1.0; // Transition Dirichlet concentration (> 0).
  double beta = 1.0;  // Emission Dirichlet concentration (> 0).
  // OPS truncation multiplier M; per-feature truncation is a0 = 1/(M * K_d).
  // Must be set (and >= 1) to run OPS-mode updates.
  std::optional<double> ops_trunc_multiplier;

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

struct HmmData {
  // counts[r][t-1][d] is the K_d-vector of outcome counts n_{r,t,d,:} for
  // cell (r, t), t = 1..T. Un-privatized data holds nonnegative integers
  // summing to n_entries[r][t-1] for every feature; privatized data holds
  // nonnegative reals with no sum constraint.
  std::vector<std::vector<std::vector<std::vector<double>>>> counts;
  // n_entries[r][t-1] is the record count N_{r,t} (a derived real after
  // privatization).
  std::vector<std::vector<double>> n_entries;
  bool privatized = false;

  int n_regions() const { return static_cast<int>(counts.size()); }
  int n_timesteps() const {
    return counts.empty() ? 0 : static_cast<int>(counts[0].size());
  }
  const std::vector<std::vector<double>>& cell(int r, int t) const {
    return counts[static_cast<size_t>(r)][static_cast<size_t>(t - 1)];
  }

  // Structural + invariant checks against a config; throws
  // std::invalid_argument with the offending cell identified.
  void validate(const HmmConfig& config) const;
};

struct HmmState {
  // z[r] has length T+1; z[r][0] == 0 is the dummy initial state and
  // z[r][t] in 1..K for t >= 1.
  std::vector<std::vector<int>> z;
  // theta[k-1][d] is the K_d emission simplex for state k, feature d.
  std::vector<std::vector<std::vector<double>>> theta;
  // Transition counts implied by z; see the module comment for indexing.
  std::vector<std::vector<double>> trans_counts;
};

// Tallies the (z_{r,t-1}, z_{r,t}) transition pairs implied by z into a
// (K+1) x K matrix (row 0 = dummy-state transitions).
std::vector<std::vector<double>> count_transitions(
    const std::vector<std::vector<int>>& z, int n_states);

// Log conditional likelihood of one cell's count vectors under state k:
// sum_d sum_j n_{d,j} * log theta_j^{(k,d)}. Accepts real-valued (privatized)
// counts. A zero theta component with positive count yields -infinity and
// sets *zero_prob_flagged when provided. All-zero counts yield 0.
double emission_loglik(const std::vector<std::vector<double>>& cell_counts,
                       const std::vector<std::vector<std::vector<double>>>& theta,
                       int state, bool* zero_prob_flagged = nullptr);

// Collapsed Gibbs conditional for z_{r,t} (t in 1..T), returned as a
// normalized probability vector over states 1..K (index k-1).
//
// Precondition: state.trans_counts must already EXCLUDE the transitions
// adjacent to cell (r, t), i.e. (z_{r,t-1} -> z_{r,t}) and, when t < T,
// (z_{r,t} -> z_{r,t+1}). The indicator corrections
// I[z_{r,t-1} = s = z_{r,t+1}] (numerator) and I[z_{r,t-1} = s]
// (denominator) are applied to the successor factor; at t = T the successor
// factor is omitted. Computation is done in log space with max-subtraction.
std::vector<double> z_conditional(int r, int t, const HmmState& state,
                                  const HmmData& data, const HmmConfig& config);

struct ThetaUpdateMode {
  bool ops = false;
  // Exponential-mechanism budget per (state, feature) update when ops is set.
  double epsilon_per_update = 0.0;
};

// Redraws every theta[k][d] from its conditional given the assignments in
// state.z and the counts in data. Exact mode samples
// Dirichlet(n_{d,k,:} + beta); ops mode samples the tempered truncated
// conditional at T = max(1, 2*Delta_d/epsilon_per_update) with truncation
// a0 = 1/(M * K_d), charging epsilon per update into `ledger` (entries in the
// parallel group `charge_prefix + "theta-f<d>"`). Improper shapes on
// privatized counts are floored per the mechanisms module and flagged via
// *shape_clamped.
void theta_update(HmmState& state, const HmmData& data, const HmmConfig& config,
                  Rng& rng, const ThetaUpdateMode& mode,
                  Ledger* ledger = nullptr, const std::string& charge_prefix = "",
                  bool* shape_clamped = nullptr);

// One-shot Laplace privatization of every per-cell count vector: per-feature
// budget epsilon/D, noise scale 2D/epsilon per component, componentwise clamp
// at 0. Charges compose in parallel across cells within a feature and
// sequentially across features (ledger total = epsilon exactly). n_entries is
// replaced by the per-cell mean of the noised vector sums (post-processing).
// Throws std::domain_error for epsilon <= 0 and std::invalid_argument if the
// input is already privatized.
HmmData privatize_hmm_counts(const HmmData& data, double epsilon, Rng& rng,
                             Ledger* ledger = nullptr);

struct FitMode {
  enum class Kind { kNonprivate, kLaplace, kOps };
  Kind kind = Kind::kNonprivate;
  // Laplace: total one-shot privatization budget. OPS: per-pass budget
  // epsilon (each z sweep is charged epsilon worst-case; each theta sweep
  // splits epsilon/D across features, parallel across states).
  double epsilon = 0.0;

  static FitMode nonprivate() { return {Kind::kNonprivate, 0.0}; }
  static FitMode laplace(double epsilon) { return {Kind::kLaplace, epsilon}; }
  static FitMode ops(double epsilon) { return {Kind::kOps, epsilon}; }
};

struct HmmSample {
  std::vector<std::vector<int>> z;
  std::vector<std::vector<std::vector<double>>> theta;
};

struct OpsCostReport {
  // Cost of releasing one converged posterior sample.
  PrivacyCost converged;
  // Worst-case per-update composition over the whole run
  // (2 * n_iters * epsilon).
  PrivacyCost worst_case;
};

struct FitResult {
  HmmConfig config;
  FitMode mode;
  // Most frequent state per cell over retained samples (slot t = 0 is the
  // dummy state, as in HmmState::z).
  std::vector<std::vector<int>> most_frequent_z;
  // Closed-form Dirichlet posterior mean (n_{d,k,:} + beta, normalized) from
  // the final iteration's assignments, for every mode.
  std::vector<std::vector<std::vector<double>>> theta_estimate;
  // Post-burn-in samples in iteration order.
  std::vector<HmmSample> samples;
  Ledger ledger;
  std::optional<OpsCostReport> ops_cost;
  bool shape_clamp_fired = false;
};

// Runs n_iters alternating sweeps (all z cells in a fresh random order, then
// all theta updates), retaining samples after burn_in. Laplace mode
// privatizes the counts once up-front and runs the sampler on the privatized
// data with no further charges; OPS mode charges every pass as documented on
// FitMode. `init`, when given, supplies the starting state (trans_counts are
// recomputed from init->z); otherwise z is uniform at random and theta is
// drawn from the prior.
FitResult fit(const HmmConfig& config, const HmmData& data, const FitMode& mode,
              int n_iters, int burn_in, Rng& rng,
              const HmmState* init = nullptr);

struct CellRef {
  int r = 0;
  int t = 0; // 1-based timestep.
};

// Summed log predictive likelihood of the held-out cells. Per cell and
// retained sample, the predictive likelihood is
//   sum_k w_k * exp(emission_loglik(cell, theta, k))
// with w_k the collapsed transition factors of z_conditional (normalized
// without the emission term, neighbor transitions excluded from the counts).
// Laplace/non-private fits average in probability space over all retained
// samples; OPS fits evaluate the final sample only. heldout_data supplies the
// true counts of the held-out cells (training data for those cells must have
// been zeroed); cells must be disjoint from training cells.
double heldout_loglik(const FitResult& fit_result, const HmmData& heldout_data,
                      const std::vector<CellRef>& heldout_cells,
                      const HmmConfig& config);

}  // namespace dpbayes

#endif  // DPBAYES_HMM_HPP_
