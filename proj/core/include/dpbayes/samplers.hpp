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

#ifndef DPBAYES_SAMPLERS_HPP_
#define DPBAYES_SAMPLERS_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "dpbayes/accountant.hpp"
#include "dpbayes/rng.hpp"

namespace dpbayes {

// Inverse CDF of Laplace(0, scale) at u in (0, 1); u = 0.5 maps to exactly 0.
double laplace_quantile(double u, double scale);

// One draw from Laplace(0, scale) via inverse CDF on a uniform draw.
double laplace_draw(double scale, Rng& rng);

// Quantile q in [0, 1] of Beta(a, b) truncated to [lo, hi]: solves
// F(x) = F(lo) + q * (F(hi) - F(lo)) by bracketed bisection with a Newton
// polish, to absolute tolerance 1e-12 in x (at most 200 bisection steps).
double truncated_beta_quantile(double a, double b, double lo, double hi,
                               double q);

// Inverse-CDF draw from Beta(a, b) truncated to [lo, hi].
double truncated_beta_draw(double a, double b, double lo, double hi, Rng& rng);

// Draw from Dirichlet(alphas) conditioned on every component >= a0, by
// sequential stick draws: with remaining mass r and m components still to
// place, the stick proportion is a truncated beta on [a0/r, (r - m*a0)/r].
// The final component is the remainder; the output sums to 1 within 1e-12.
// a0 = 0 reduces to an exact untruncated Dirichlet draw.  Requires
// 0 <= a0 < 1/K; infeasible floors throw std::domain_error.
std::vector<double> truncated_dirichlet_draw(const std::vector<double>& alphas,
                                             double a0, Rng& rng);

// Exponential-mechanism Gibbs draw over a finite support: index k is chosen
// with probability proportional to exp(utilities[k] * epsilon /
// (2 * delta_log)), stabilized by subtracting the max utility.
std::size_t exp_mech_gibbs_draw(const std::vector<double>& utilities,
                                double delta_log, double epsilon, Rng& rng);

struct MetropolisResult {
  double theta = 0.0;
  bool accepted = false;
  // Monte Carlo estimate of the rejection probability at the input point —
  // an estimate from fresh proposal probes, not a certified bound.  The
  // caller charges (epsilon, delta_estimate).
  double delta_estimate = 0.0;
};

// One tempered Metropolis step at temperature T = 2 * delta_log / epsilon:
// acceptance probability min(1, exp((log_joint(prop) - log_joint(theta))/T)).
// The proposal must be symmetric.  After the move, reject_probe_count fresh
// proposals at the input theta estimate Pr(reject).
MetropolisResult metropolis_update(
    const std::function<double(double)>& log_joint, double delta_log,
    double epsilon, const std::function<double(double, Rng&)>& proposal,
    double theta, Rng& rng, int reject_probe_count);

// Annealing path for importance sampling: level j targets
// f_j(theta) = Pr(theta, X)^(beta_j) with beta_j = epsilons[j] /
// (2 * delta_log) capped into [0, 1].  epsilons[0] is the target-level
// budget; the sequence is nonincreasing toward the high-temperature end.
struct AnnealingSchedule {
  std::vector<double> epsilons;
  double delta_log = 1.0;

  std::vector<double> betas() const;
  void validate() const;  // throws std::domain_error when invalid
};

struct WeightedSample {
  double theta = 0.0;
  double log_weight = 0.0;
};

struct AisResult {
  std::vector<WeightedSample> samples;
  PrivacyCost cost;
};

// Annealed importance sampling.  Per sample: draw theta from f_n via
// initial_draw, then for levels j = n-1 .. 1 apply kernel(j, theta) and
// accumulate the telescoping log weight sum_{j=0}^{n-1} (beta_j -
// beta_{j+1}) * log_joint evaluated before each kernel application; one
// final kernel(0, ...) pass leaves the target invariant.  Each sample uses
// its own derived rng stream, so results are independent of evaluation
// order.  The charged cost is n_samples * (n_variables if
// per_variable_sequential else 1) * sum_j epsilons[j]; kernels are assumed
// to make one privacy-charged pass per level.
AisResult ais_run(const AnnealingSchedule& schedule,
                  const std::function<double(double)>& log_joint,
                  const std::function<double(std::size_t, double, Rng&)>& kernel,
                  const std::function<double(Rng&)>& initial_draw,
                  std::size_t n_samples, bool per_variable_sequential,
                  std::size_t n_variables, Rng& rng);

struct PrivatizedWeights {
  std::vector<double> weights;
  // Every noised weight clamped to zero; the uniform fallback was emitted.
  bool fallback_uniform = false;
};

// Normalizes exp(log_weights) to the simplex, adds Laplace(2/epsilon) noise
// per component, clamps at 0, and renormalizes to sum 1.
PrivatizedWeights privatize_weights(const std::vector<double>& log_weights,
                                    double epsilon, Rng& rng);

}  // namespace dpbayes

#endif  // DPBAYES_SAMPLERS_HPP_
