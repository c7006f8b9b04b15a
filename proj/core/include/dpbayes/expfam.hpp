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

#ifndef DPBAYES_EXPFAM_HPP_
#define DPBAYES_EXPFAM_HPP_

#include <vector>

#include "dpbayes/rng.hpp"

namespace dpbayes {

// Aggregate sufficient statistics of a dataset: the componentwise sum of the
// per-record indicator statistics plus the record count.
struct SuffStats {
  std::vector<double> stats;
  double count = 0.0;
  // Set once noise has been added: downstream consumers must not assert the
  // clean-data invariants (components summing to count, integrality).
  bool privatized = false;
};

// Conjugate prior in mean/pseudo-count coordinates: contributes alpha * chi
// pseudo-statistics and alpha pseudo-records to the posterior.
struct ConjugatePrior {
  std::vector<double> chi;
  double alpha = 1.0;
};

// Natural-coordinate posterior: eta_stats = alpha * chi + sum of statistics,
// eta_count = alpha + N.  Conventional shape parameters are recovered at the
// sampling boundary as eta_stats + 1 (so the flat prior is eta_stats = 0).
struct PosteriorParams {
  std::vector<double> eta_stats;
  double eta_count = 0.0;
  bool privatized = false;
};

// Bernoulli likelihood with Beta conjugate prior.  Per-record statistic is
// the two-vector [x, 1-x].  trunc = a0 restricts the parameter to
// [a0, 1-a0]; a0 = 0 means untruncated.
struct BetaBernoulliModel {
  double trunc = 0.0;
};

// Categorical likelihood over {1..dim} with Dirichlet conjugate prior.
// Per-record statistic is the one-hot indicator vector.  trunc = a0 bounds
// every simplex component below by a0; a0 = 0 means untruncated.
struct CategoricalDirichletModel {
  int dim = 2;
  double trunc = 0.0;
};

// --- Sufficient statistics ---------------------------------------------
// Outcomes: {0,1} for the Bernoulli model, {1..dim} for the categorical
// model.  Throws std::domain_error naming the first offending record index.
SuffStats aggregate_stats(const BetaBernoulliModel& model,
                          const std::vector<int>& data);
SuffStats aggregate_stats(const CategoricalDirichletModel& model,
                          const std::vector<int>& data);

// --- Conjugate update ----------------------------------------------------
// eta_stats = alpha * chi + stats, eta_count = alpha + count.  Throws
// std::invalid_argument on dimension mismatch.  The privatized flag is
// carried through from the statistics.
PosteriorParams update_posterior(const ConjugatePrior& prior,
                                 const SuffStats& stats);

// --- Densities -----------------------------------------------------------
// Log of the normalized posterior density at theta, including the
// truncation renormalization when the model is truncated.  Throws
// std::domain_error if theta lies outside the (truncated) support or the
// posterior is improper.
double posterior_log_pdf(const BetaBernoulliModel& model,
                         const PosteriorParams& post, double theta);
double posterior_log_pdf(const CategoricalDirichletModel& model,
                         const PosteriorParams& post,
                         const std::vector<double>& theta);

// --- Exact sampling ------------------------------------------------------
// Exact draw from the (truncated) posterior.  Improper shapes throw
// std::domain_error, except that posteriors built from privatized statistics
// are sampled with shape parameters floored at 1e-6 so extreme noise draws
// still yield a sample; *shape_clamped (if non-null) reports whether the
// floor fired.
double sample_posterior(const BetaBernoulliModel& model,
                        const PosteriorParams& post, Rng& rng,
                        bool* shape_clamped = nullptr);
std::vector<double> sample_posterior(const CategoricalDirichletModel& model,
                                     const PosteriorParams& post, Rng& rng,
                                     bool* shape_clamped = nullptr);

// --- Means ---------------------------------------------------------------
// Exact closed-form mean when untruncated; numerically integrated
// (relative tolerance 1e-8) when truncated.
double posterior_mean(const BetaBernoulliModel& model,
                      const PosteriorParams& post);
std::vector<double> posterior_mean(const CategoricalDirichletModel& model,
                                   const PosteriorParams& post);

// --- KL divergence -------------------------------------------------------
// KL(a || b): closed exponential-family form when untruncated, numeric
// quadrature (relative tolerance 1e-6) when truncated.  Both posteriors
// must share the model's support.
double kl_divergence(const BetaBernoulliModel& model,
                     const PosteriorParams& post_a,
                     const PosteriorParams& post_b);
double kl_divergence(const CategoricalDirichletModel& model,
                     const PosteriorParams& post_a,
                     const PosteriorParams& post_b);

// --- Shared helpers (used by the mechanisms and hmm layers) --------------

// Conventional shape parameters (eta_stats + 1), floored at 1e-6 when the
// posterior is privatized; throws std::domain_error when a shape is
// non-positive on a non-privatized posterior.
std::vector<double> shape_parameters(const PosteriorParams& post,
                                     bool* shape_clamped = nullptr);

// Probability that a Dirichlet(alphas) draw has every component >= a0
// (the truncated family's normalization constant), by nested adaptive
// quadrature with per-(alphas, a0) caching.  a0 = 0 returns 1.
double truncated_dirichlet_mass(const std::vector<double>& alphas, double a0);

}  // namespace dpbayes

#endif  // DPBAYES_EXPFAM_HPP_
