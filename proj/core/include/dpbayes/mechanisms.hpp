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

#ifndef DPBAYES_MECHANISMS_HPP_
#define DPBAYES_MECHANISMS_HPP_

#include <vector>

#include "dpbayes/expfam.hpp"
#include "dpbayes/rng.hpp"

namespace dpbayes {

// A sensitivity value that is either a finite nonnegative real or explicitly
// unbounded — never an encoded sentinel.
class Sensitivity {
 public:
  static Sensitivity finite(double value);
  static Sensitivity unbounded();

  bool is_finite() const { return finite_; }
  // Throws UnboundedSensitivityError when unbounded.
  double value() const;

 private:
  Sensitivity(bool finite, double value) : finite_(finite), value_(value) {}
  bool finite_;
  double value_;
};

struct SensitivityReport {
  Sensitivity l1;        // worst-case L1 change of the aggregate statistics
  Sensitivity exp_mech;  // worst-case change of log Pr(theta, X)
};

// Stand-in for a model whose statistics are unbounded (no truncation or data
// bounds): both sensitivities are unbounded and privatization is refused.
struct UnboundedStatModel {};

// Worst-case L1 change of the aggregate statistic vector when one record is
// replaced.  Both indicator families move one unit of mass between two
// components, so the value is 2 regardless of truncation.
Sensitivity l1_stat_sensitivity(const BetaBernoulliModel& model);
Sensitivity l1_stat_sensitivity(const CategoricalDirichletModel& model);
Sensitivity l1_stat_sensitivity(const UnboundedStatModel& model);

// Worst-case change of the log joint under one-record replacement:
// -log a0 + log(1 - a0) for the truncated Bernoulli model and
// log((1 - (K-1) a0) / a0) for the truncated categorical model; unbounded
// when a0 = 0.
Sensitivity exp_mech_sensitivity(const BetaBernoulliModel& model);
Sensitivity exp_mech_sensitivity(const CategoricalDirichletModel& model);
Sensitivity exp_mech_sensitivity(const UnboundedStatModel& model);

SensitivityReport sensitivity_report(const BetaBernoulliModel& model);
SensitivityReport sensitivity_report(const CategoricalDirichletModel& model);
SensitivityReport sensitivity_report(const UnboundedStatModel& model);

// Laplace noise scale b = sensitivity / epsilon.  Throws
// UnboundedSensitivityError for unbounded sensitivity ("cannot privatize an
// unbounded statistic") and std::domain_error for epsilon <= 0.
double laplace_scale(const Sensitivity& sensitivity, double epsilon);

// Adds independent Laplace(l1_sensitivity / epsilon) noise to each statistic
// component, then projects by clamping each component to >= 0.  The count is
// carried through unchanged and the result is flagged privatized.  The
// projection is the clamp only: the components-sum-to-count identity is
// deliberately not restored.
SuffStats privatize_stats(const BetaBernoulliModel& model,
                          const SuffStats& stats, double epsilon, Rng& rng);
SuffStats privatize_stats(const CategoricalDirichletModel& model,
                          const SuffStats& stats, double epsilon, Rng& rng);

// The OPS release object: sampling temperature plus the split of the
// requested budget into the part actually charged and the remainder.
struct TemperedSampleSpec {
  double temperature = 1.0;
  double epsilon_charged = 0.0;
  double epsilon_unused = 0.0;
};

// T = max(1, 2 * delta / epsilon) with delta = exp_mech_sensitivity(model):
// budgets above 2 * delta are capped at the true posterior (T = 1) and the
// excess is reported unused rather than sharpening beyond the posterior.
TemperedSampleSpec ops_temperature(const BetaBernoulliModel& model,
                                   double epsilon);
TemperedSampleSpec ops_temperature(const CategoricalDirichletModel& model,
                                   double epsilon);

// Exact draw from the T-tempered truncated posterior: every natural-
// parameter exponent is divided by T (shape s becomes (s - 1)/T + 1); the
// support is unchanged.  Requires a truncated model unless T = 1; an
// improper tempered posterior throws std::domain_error.
double ops_sample(const BetaBernoulliModel& model, const PosteriorParams& post,
                  const TemperedSampleSpec& spec, Rng& rng);
std::vector<double> ops_sample(const CategoricalDirichletModel& model,
                               const PosteriorParams& post,
                               const TemperedSampleSpec& spec, Rng& rng);

// Tempered posterior parameters (eta_stats / T), exposed so densities of the
// OPS release can be evaluated with posterior_log_pdf.
PosteriorParams tempered_posterior(const PosteriorParams& post,
                                   double temperature);

}  // namespace dpbayes

#endif  // DPBAYES_MECHANISMS_HPP_
