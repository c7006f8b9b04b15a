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

#include "dpbayes/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpbayes/expfam.hpp"
#include "dpbayes/mechanisms.hpp"
#include "dpbayes/special.hpp"

namespace dpbayes {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string cell_name(int r, int t) {
  return "(" + std::to_string(r) + "," + std::to_string(t) + ")";
}

// Log transition factor of the collapsed z conditional for candidate state s,
// given excluded transition counts `tc` and their row totals. `next` is
// ignored when has_next is false.
double transition_log_factor(int s, int prev, int next, bool has_next,
                             const std::vector<std::vector<double>>& tc,
                             const std::vector<double>& row_tot, int n_states,
                             double alpha) {
  const double k_alpha = n_states * alpha;
  double lp = std::log(tc[prev][s - 1] + alpha) -
              std::log(row_tot[prev] + k_alpha);
  if (has_next) {
    const double ind_top = (prev == s && s == next) ? 1.0 : 0.0;
    const double ind_bot = (prev == s) ? 1.0 : 0.0;
    lp += std::log(tc[s][next - 1] + ind_top + alpha) -
          std::log(row_tot[s] + ind_bot + k_alpha);
  }
  return lp;
}

std::vector<double> row_totals(const std::vector<std::vector<double>>& tc) {
  std::vector<double> tot(tc.size(), 0.0);
  for (size_t i = 0; i < tc.size(); ++i) {
    for (double v : tc[i]) tot[i] += v;
  }
  return tot;
}

// Draws an index from a normalized probability vector by cumulative walk.
int categorical_draw(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u <= cum) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

PosteriorParams dirichlet_params(const std::vector<double>& shapes,
                                 bool privatized) {
  PosteriorParams post;
  post.eta_stats.resize(shapes.size());
  double total = 0.0;
  for (size_t j = 0; j < shapes.size(); ++j) {
    post.eta_stats[j] = shapes[j] - 1.0;
    total += shapes[j];
  }
  post.eta_count = total - static_cast<double>(shapes.size()) + 1.0;
  post.privatized = privatized;
  return post;
}

// Sums per-cell counts into per-(state, feature) emission count vectors
// n_{d,k,:} indexed [k-1][d][j].
std::vector<std::vector<std::vector<double>>> gather_emission_counts(
    const std::vector<std::vector<int>>& z, const HmmData& data,
    const HmmConfig& config) {
  std::vector<std::vector<std::vector<double>>> out(
      static_cast<size_t>(config.n_states));
  for (int k = 0; k < config.n_states; ++k) {
    out[k].resize(static_cast<size_t>(config.n_features));
    for (int d = 0; d < config.n_features; ++d) {
      out[k][d].assign(static_cast<size_t>(config.feature_dims[d]), 0.0);
    }
  }
  const int n_r = data.n_regions();
  const int n_t = data.n_timesteps();
  for (int r = 0; r < n_r; ++r) {
    for (int t = 1; t <= n_t; ++t) {
      const int k = z[r][t] - 1;
      const auto& cell = data.cell(r, t);
      for (int d = 0; d < config.n_features; ++d) {
        for (size_t j = 0; j < cell[d].size(); ++j) {
          out[k][d][j] += cell[d][j];
        }
      }
    }
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> dirichlet_mean_estimate(
    const std::vector<std::vector<std::vector<double>>>& emission_counts,
    double beta) {
  auto est = emission_counts;
  for (auto& per_state : est) {
    for (auto& vec : per_state) {
      double total = 0.0;
      for (double& v : vec) {
        v += beta;
        total += v;
      }
      for (double& v : vec) v /= total;
    }
  }
  return est;
}

void validate_state_shape(const HmmState& state, const HmmConfig& config,
                          const HmmData& data) {
  const size_t n_r = static_cast<size_t>(data.n_regions());
  const size_t n_t = static_cast<size_t>(data.n_timesteps());
  if (state.z.size() != n_r) {
    throw std::invalid_argument("hmm: state z has wrong region count");
  }
  for (size_t r = 0; r < n_r; ++r) {
    if (state.z[r].size() != n_t + 1) {
      throw std::invalid_argument("hmm: state z has wrong timestep count");
    }
    if (state.z[r][0] != 0) {
      throw std::invalid_argument("hmm: dummy initial state must be 0");
    }
    for (size_t t = 1; t <= n_t; ++t) {
      if (state.z[r][t] < 1 || state.z[r][t] > config.n_states) {
        throw std::invalid_argument("hmm: state label out of range at cell " +
                                    cell_name(static_cast<int>(r),
                                              static_cast<int>(t)));
      }
    }
  }
  if (state.theta.size() != static_cast<size_t>(config.n_states)) {
    throw std::invalid_argument("hmm: theta has wrong state count");
  }
  for (const auto& per_state : state.theta) {
    if (per_state.size() != static_cast<size_t>(config.n_features)) {
      throw std::invalid_argument("hmm: theta has wrong feature count");
    }
    for (size_t d = 0; d < per_state.size(); ++d) {
      if (per_state[d].size() != static_cast<size_t>(config.feature_dims[d])) {
        throw std::invalid_argument("hmm: theta row has wrong dimension");
      }
      double sum = 0.0;
      for (double v : per_state[d]) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw std::invalid_argument("hmm: theta component out of range");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-6) {
        throw std::invalid_argument("hmm: theta row does not sum to 1");
      }
    }
  }
}

}  // namespace

void HmmConfig::validate() const {
  if (n_states < 1) {
    throw std::invalid_argument("hmm: n_states must be >= 1");
  }
  if (n_features < 1) {
    throw std::invalid_argument("hmm: n_features must be >= 1");
  }
  if (feature_dims.size() != static_cast<size_t>(n_features)) {
    throw std::invalid_argument(
        "hmm: feature_dims must have one entry per feature");
  }
  for (int dim : feature_dims) {
    if (dim < 2) {
      throw std::invalid_argument("hmm: every feature dim must be >= 2");
    }
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("hmm: alpha must be positive");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("hmm: beta must be positive");
  }
  if (ops_trunc_multiplier.has_value() &&
      (!(*ops_trunc_multiplier >= 1.0) ||
       !std::isfinite(*ops_trunc_multiplier))) {
    throw std::invalid_argument("hmm: ops_trunc_multiplier must be >= 1");
  }
}

void HmmData::validate(const HmmConfig& config) const {
  config.validate();
  if (counts.size() != n_entries.size()) {
    throw std::invalid_argument("hmm: counts/n_entries region mismatch");
  }
  const size_t n_t = counts.empty() ? 0 : counts[0].size();
  for (size_t r = 0; r < counts.size(); ++r) {
    if (counts[r].size() != n_t || n_entries[r].size() != n_t) {
      throw std::invalid_argument("hmm: ragged timestep axis at region " +
                                  std::to_string(r));
    }
    for (size_t t0 = 0; t0 < n_t; ++t0) {
      const auto& cell = counts[r][t0];
      if (cell.size() != static_cast<size_t>(config.n_features)) {
        throw std::invalid_argument("hmm: wrong feature count at cell " +
                                    cell_name(static_cast<int>(r),
                                              static_cast<int>(t0) + 1));
      }
      for (size_t d = 0; d < cell.size(); ++d) {
        if (cell[d].size() != static_cast<size_t>(config.feature_dims[d])) {
          throw std::invalid_argument("hmm: wrong outcome count at cell " +
                                      cell_name(static_cast<int>(r),
                                                static_cast<int>(t0) + 1));
        }
        double sum = 0.0;
        for (double v : cell[d]) {
          if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("hmm: negative count at cell " +
                                        cell_name(static_cast<int>(r),
                                                  static_cast<int>(t0) + 1));
          }
          if (!privatized && std::floor(v) != v) {
            throw std::invalid_argument("hmm: non-integer raw count at cell " +
                                        cell_name(static_cast<int>(r),
                                                  static_cast<int>(t0) + 1));
          }
          sum += v;
        }
        if (!privatized && std::abs(sum - n_entries[r][t0]) > 1e-6) {
          throw std::invalid_argument(
              "hmm: counts do not sum to the record count at cell " +
              cell_name(static_cast<int>(r), static_cast<int>(t0) + 1));
        }
      }
    }
  }
}

std::vector<std::vector<double>> count_transitions(
    const std::vector<std::vector<int>>& z, int n_states) {
  std::vector<std::vector<double>> tc(
      static_cast<size_t>(n_states) + 1,
      std::vector<double>(static_cast<size_t>(n_states), 0.0));
  for (const auto& chain : z) {
    if (chain.empty() || chain[0] != 0) {
      throw std::invalid_argument(
          "hmm: every chain must start with the dummy state 0");
    }
    for (size_t t = 1; t < chain.size(); ++t) {
      if (chain[t] < 1 || chain[t] > n_states) {
        throw std::invalid_argument("hmm: state label out of range");
      }
      tc[chain[t - 1]][chain[t] - 1] += 1.0;
    }
  }
  return tc;
}

double emission_loglik(const std::vector<std::vector<double>>& cell_counts,
                       const std::vector<std::vector<std::vector<double>>>& theta,
                       int state, bool* zero_prob_flagged) {
  if (state < 1 || state > static_cast<int>(theta.size())) {
    throw std::invalid_argument("hmm: emission state out of range");
  }
  const auto& rows = theta[static_cast<size_t>(state - 1)];
  if (cell_counts.size() != rows.size()) {
    throw std::invalid_argument("hmm: emission feature count mismatch");
  }
  double ll = 0.0;
  for (size_t d = 0; d < rows.size(); ++d) {
    if (cell_counts[d].size() != rows[d].size()) {
      throw std::invalid_argument("hmm: emission outcome count mismatch");
    }
    for (size_t j = 0; j < rows[d].size(); ++j) {
      const double n = cell_counts[d][j];
      if (n == 0.0) continue;
      if (rows[d][j] <= 0.0) {
        if (zero_prob_flagged != nullptr) *zero_prob_flagged = true;
        return -kInf;
      }
      ll += n * std::log(rows[d][j]);
    }
  }
  return ll;
}

std::vector<double> z_conditional(int r, int t, const HmmState& state,
                                  const HmmData& data,
                                  const HmmConfig& config) {
  const int n_states = config.n_states;
  if (r < 0 || r >= data.n_regions() || t < 1 || t > data.n_timesteps()) {
    throw std::invalid_argument("hmm: cell index out of range");
  }
  if (n_states == 1) return {1.0};

  const int prev = state.z[r][t - 1];
  const bool has_next = t < data.n_timesteps();
  const int next = has_next ? state.z[r][t + 1] : 0;
  const auto tot = row_totals(state.trans_counts);
  const auto& cell = data.cell(r, t);

  std::vector<double> lp(static_cast<size_t>(n_states));
  double max_lp = -kInf;
  for (int s = 1; s <= n_states; ++s) {
    double v = transition_log_factor(s, prev, next, has_next,
                                     state.trans_counts, tot, n_states,
                                     config.alpha);
    v += emission_loglik(cell, state.theta, s);
    lp[s - 1] = v;
    max_lp = std::max(max_lp, v);
  }
  if (!std::isfinite(max_lp)) {
    throw std::runtime_error(
        "hmm: every state has zero likelihood at cell " + cell_name(r, t));
  }
  double total = 0.0;
  for (double& v : lp) {
    v = std::exp(v - max_lp);
    total += v;
  }
  for (double& v : lp) v /= total;
  return lp;
}

void theta_update(HmmState& state, const HmmData& data,
                  const HmmConfig& config, Rng& rng,
                  const ThetaUpdateMode& mode, Ledger* ledger,
                  const std::string& charge_prefix, bool* shape_clamped) {
  if (mode.ops) {
    if (!(mode.epsilon_per_update > 0.0)) {
      throw std::domain_error(
          "hmm: ops theta update requires a positive per-update budget");
    }
    if (!config.ops_trunc_multiplier.has_value()) {
      throw std::invalid_argument(
          "hmm: ops theta update requires ops_trunc_multiplier");
    }
  }
  const auto counts = gather_emission_counts(state.z, data, config);
  for (int k = 0; k < config.n_states; ++k) {
    for (int d = 0; d < config.n_features; ++d) {
      std::vector<double> shapes = counts[k][d];
      for (double& v : shapes) v += config.beta;
      const auto post = dirichlet_params(shapes, data.privatized);
      if (mode.ops) {
        const int dim = config.feature_dims[d];
        const double a0 = 1.0 / (*config.ops_trunc_multiplier * dim);
        const CategoricalDirichletModel model{dim, a0};
        const auto spec = ops_temperature(model, mode.epsilon_per_update);
        state.theta[k][d] = sample_posterior(
            model, tempered_posterior(post, spec.temperature), rng,
            shape_clamped);
        if (ledger != nullptr) {
          ledger->charge_parallel(
              "theta update state " + std::to_string(k + 1) + " feature " +
                  std::to_string(d + 1),
              charge_prefix + "theta-f" + std::to_string(d + 1),
              PrivacyCost{spec.epsilon_charged, 0.0});
        }
      } else {
        const CategoricalDirichletModel model{config.feature_dims[d], 0.0};
        state.theta[k][d] = sample_posterior(model, post, rng, shape_clamped);
      }
    }
  }
}

HmmData privatize_hmm_counts(const HmmData& data, double epsilon, Rng& rng,
                             Ledger* ledger) {
  if (data.privatized) {
    throw std::invalid_argument("hmm: counts are already privatized");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::domain_error("hmm: privatization budget must be positive");
  }
  HmmData out = data;
  out.privatized = true;
  const int n_r = data.n_regions();
  const int n_t = data.n_timesteps();
  if (n_r == 0 || n_t == 0) return out;
  const int n_features = static_cast<int>(data.counts[0][0].size());
  const double eps_d = epsilon / n_features;
  for (int d = 0; d < n_features; ++d) {
    const std::string group = "privatize-f" + std::to_string(d + 1);
    for (int r = 0; r < n_r; ++r) {
      for (int t0 = 0; t0 < n_t; ++t0) {
        const auto& vec = data.counts[r][t0][d];
        const CategoricalDirichletModel model{static_cast<int>(vec.size()),
                                              0.0};
        SuffStats stats{vec, data.n_entries[r][t0], false};
        out.counts[r][t0][d] =
            privatize_stats(model, stats, eps_d, rng).stats;
        if (ledger != nullptr) {
          ledger->charge_parallel("privatize feature " + std::to_string(d + 1) +
                                      " cell " + cell_name(r, t0 + 1),
                                  group, PrivacyCost{eps_d, 0.0});
        }
      }
    }
  }
  // n_entries is a derived quantity after privatization: the per-cell mean of
  // the noised vector sums (post-processing, no extra charge).
  for (int r = 0; r < n_r; ++r) {
    for (int t0 = 0; t0 < n_t; ++t0) {
      double total = 0.0;
      for (const auto& vec : out.counts[r][t0]) {
        for (double v : vec) total += v;
      }
      out.n_entries[r][t0] = total / n_features;
    }
  }
  return out;
}

FitResult fit(const HmmConfig& config, const HmmData& data,
              const FitMode& mode, int n_iters, int burn_in, Rng& rng,
              const HmmState* init) {
  config.validate();
  data.validate(config);
  if (burn_in < 0 || n_iters <= burn_in) {
    throw std::invalid_argument("hmm: need n_iters > burn_in >= 0");
  }
  if (mode.kind != FitMode::Kind::kNonprivate) {
    if (!(mode.epsilon > 0.0) || !std::isfinite(mode.epsilon)) {
      throw std::domain_error("hmm: private fits need a positive budget");
    }
    if (data.privatized) {
      throw std::invalid_argument(
          "hmm: private fits consume raw counts; data is already privatized");
    }
  }
  if (mode.kind == FitMode::Kind::kOps &&
      !config.ops_trunc_multiplier.has_value()) {
    throw std::invalid_argument("hmm: ops mode requires ops_trunc_multiplier");
  }

  FitResult result;
  result.config = config;
  result.mode = mode;

  Rng priv_rng = rng.stream(0);
  Rng init_rng = rng.stream(1);

  // Laplace mode privatizes once up-front; the sampler only ever sees the
  // privatized data value from here on.
  const HmmData* working = &data;
  HmmData privatized_data;
  if (mode.kind == FitMode::Kind::kLaplace) {
    privatized_data =
        privatize_hmm_counts(data, mode.epsilon, priv_rng, &result.ledger);
    working = &privatized_data;
  }

  const int n_r = data.n_regions();
  const int n_t = data.n_timesteps();
  const int n_states = config.n_states;

  HmmState state;
  if (init != nullptr) {
    validate_state_shape(*init, config, data);
    state = *init;
  } else {
    state.z.assign(static_cast<size_t>(n_r),
                   std::vector<int>(static_cast<size_t>(n_t) + 1, 0));
    for (int r = 0; r < n_r; ++r) {
      for (int t = 1; t <= n_t; ++t) {
        state.z[r][t] =
            1 + static_cast<int>(init_rng.uniform_index(
                    static_cast<std::uint64_t>(n_states)));
      }
    }
    state.theta.resize(static_cast<size_t>(n_states));
    for (int k = 0; k < n_states; ++k) {
      state.theta[k].resize(static_cast<size_t>(config.n_features));
      for (int d = 0; d < config.n_features; ++d) {
        const CategoricalDirichletModel model{config.feature_dims[d], 0.0};
        const auto prior = dirichlet_params(
            std::vector<double>(static_cast<size_t>(config.feature_dims[d]),
                                config.beta),
            false);
        state.theta[k][d] = sample_posterior(model, prior, init_rng);
      }
    }
  }
  state.trans_counts = count_transitions(state.z, n_states);

  ThetaUpdateMode theta_mode;
  if (mode.kind == FitMode::Kind::kOps) {
    theta_mode.ops = true;
    theta_mode.epsilon_per_update = mode.epsilon / config.n_features;
  }

  std::vector<std::pair<int, int>> cells;
  cells.reserve(static_cast<size_t>(n_r) * static_cast<size_t>(n_t));
  for (int r = 0; r < n_r; ++r) {
    for (int t = 1; t <= n_t; ++t) cells.emplace_back(r, t);
  }

  for (int iter = 1; iter <= n_iters; ++iter) {
    Rng it = rng.stream(static_cast<std::uint64_t>(1 + iter));
    auto order = cells;
    it.shuffle(order.begin(), order.end());
    for (const auto& [r, t] : order) {
      const int cur = state.z[r][t];
      const int prev = state.z[r][t - 1];
      const bool has_next = t < n_t;
      const int next = has_next ? state.z[r][t + 1] : 0;
      state.trans_counts[prev][cur - 1] -= 1.0;
      if (has_next) state.trans_counts[cur][next - 1] -= 1.0;
      const auto probs = z_conditional(r, t, state, *working, config);
      const int drawn = 1 + categorical_draw(probs, it);
      state.z[r][t] = drawn;
      state.trans_counts[prev][drawn - 1] += 1.0;
      if (has_next) state.trans_counts[drawn][next - 1] += 1.0;
    }
    if (mode.kind == FitMode::Kind::kOps) {
      result.ledger.charge(
          "iteration " + std::to_string(iter) + " z sweep (worst case)",
          PrivacyCost{mode.epsilon, 0.0});
    }
    bool clamped = false;
    theta_update(state, *working, config, it, theta_mode,
                 mode.kind == FitMode::Kind::kOps ? &result.ledger : nullptr,
                 "iter" + std::to_string(iter) + "-", &clamped);
    result.shape_clamp_fired = result.shape_clamp_fired || clamped;
    if (iter > burn_in) {
      result.samples.push_back(HmmSample{state.z, state.theta});
    }
  }

  // Most frequent state per cell over the retained samples (ties go to the
  // smallest label).
  result.most_frequent_z.assign(
      static_cast<size_t>(n_r),
      std::vector<int>(static_cast<size_t>(n_t) + 1, 0));
  for (int r = 0; r < n_r; ++r) {
    for (int t = 1; t <= n_t; ++t) {
      std::vector<int> tally(static_cast<size_t>(n_states), 0);
      for (const auto& sample : result.samples) {
        tally[sample.z[r][t] - 1] += 1;
      }
      int best = 0;
      for (int k = 1; k < n_states; ++k) {
        if (tally[k] > tally[best]) best = k;
      }
      result.most_frequent_z[r][t] = best + 1;
    }
  }

  result.theta_estimate = dirichlet_mean_estimate(
      gather_emission_counts(state.z, *working, config), config.beta);

  if (mode.kind == FitMode::Kind::kOps) {
    result.ops_cost = OpsCostReport{PrivacyCost{mode.epsilon, 0.0},
                                    result.ledger.total()};
  }
  return result;
}

double heldout_loglik(const FitResult& fit_result, const HmmData& heldout_data,
                      const std::vector<CellRef>& heldout_cells,
                      const HmmConfig& config) {
  if (heldout_cells.empty()) return 0.0;
  if (fit_result.samples.empty()) {
    throw std::invalid_argument("hmm: fit result has no retained samples");
  }
  const int n_t = heldout_data.n_timesteps();
  for (const auto& cell : heldout_cells) {
    if (cell.r < 0 || cell.r >= heldout_data.n_regions() || cell.t < 1 ||
        cell.t > n_t) {
      throw std::invalid_argument("hmm: held-out cell out of range");
    }
  }

  const bool final_only = fit_result.mode.kind == FitMode::Kind::kOps;
  const size_t first =
      final_only ? fit_result.samples.size() - 1 : static_cast<size_t>(0);
  const size_t n_samples = fit_result.samples.size() - first;
  const int n_states = config.n_states;

  // per_cell[c][s] = log predictive likelihood of cell c under sample s.
  std::vector<std::vector<double>> per_cell(
      heldout_cells.size(), std::vector<double>(n_samples, 0.0));

  for (size_t s = 0; s < n_samples; ++s) {
    const auto& sample = fit_result.samples[first + s];
    auto tc = count_transitions(sample.z, n_states);
    for (size_t c = 0; c < heldout_cells.size(); ++c) {
      const int r = heldout_cells[c].r;
      const int t = heldout_cells[c].t;
      const int cur = sample.z[r][t];
      const int prev = sample.z[r][t - 1];
      const bool has_next = t < n_t;
      const int next = has_next ? sample.z[r][t + 1] : 0;
      tc[prev][cur - 1] -= 1.0;
      if (has_next) tc[cur][next - 1] -= 1.0;
      const auto tot = row_totals(tc);
      std::vector<double> lw(static_cast<size_t>(n_states));
      for (int k = 1; k <= n_states; ++k) {
        lw[k - 1] = transition_log_factor(k, prev, next, has_next, tc, tot,
                                          n_states, config.alpha);
      }
      const double norm = logsumexp(lw);
      std::vector<double> terms(static_cast<size_t>(n_states));
      for (int k = 1; k <= n_states; ++k) {
        terms[k - 1] = lw[k - 1] - norm +
                       emission_loglik(heldout_data.cell(r, t), sample.theta, k);
      }
      per_cell[c][s] = logsumexp(terms);
      tc[prev][cur - 1] += 1.0;
      if (has_next) tc[cur][next - 1] += 1.0;
    }
  }

  double total = 0.0;
  for (const auto& row : per_cell) {
    total += logsumexp(row) - std::log(static_cast<double>(n_samples));
  }
  return total;
}

}  // namespace dpbayes
