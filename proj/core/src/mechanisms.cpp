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

#include "dpbayes/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpbayes/errors.hpp"
#include "dpbayes/samplers.hpp"

namespace dpbayes {

namespace {

template <typename Model>
SuffStats privatize_impl(const Model& model, const SuffStats& stats,
                         double epsilon, Rng& rng) {
  const double scale = laplace_scale(l1_stat_sensitivity(model), epsilon);
  SuffStats out = stats;
  for (double& s : out.stats) {
    s = std::max(s + laplace_draw(scale, rng), 0.0);
  }
  out.privatized = true;
  return out;
}

template <typename Model>
TemperedSampleSpec ops_temperature_impl(const Model& model, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("ops_temperature: epsilon must be > 0");
  }
  const double delta = exp_mech_sensitivity(model).value();
  TemperedSampleSpec spec;
  spec.temperature = std::max(1.0, 2.0 * delta / epsilon);
  spec.epsilon_charged = std::min(epsilon, 2.0 * delta);
  spec.epsilon_unused = epsilon - spec.epsilon_charged;
  return spec;
}

void check_ops_preconditions(double trunc, const TemperedSampleSpec& spec) {
  if (!(spec.temperature >= 1.0)) {
    throw std::domain_error("ops_sample: temperature must be >= 1");
  }
  if (trunc <= 0.0 && spec.temperature > 1.0) {
    throw std::domain_error(
        "ops_sample: tempered sampling requires a truncated model");
  }
}

}  // namespace

Sensitivity Sensitivity::finite(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::domain_error("Sensitivity: finite value must be >= 0");
  }
  return Sensitivity(true, value);
}

Sensitivity Sensitivity::unbounded() { return Sensitivity(false, 0.0); }

double Sensitivity::value() const {
  if (!finite_) {
    throw UnboundedSensitivityError("sensitivity is unbounded");
  }
  return value_;
}

Sensitivity l1_stat_sensitivity(const BetaBernoulliModel&) {
  // Replacing one record moves one unit between the two indicator slots.
  return Sensitivity::finite(2.0);
}

Sensitivity l1_stat_sensitivity(const CategoricalDirichletModel&) {
  return Sensitivity::finite(2.0);
}

Sensitivity l1_stat_sensitivity(const UnboundedStatModel&) {
  return Sensitivity::unbounded();
}

Sensitivity exp_mech_sensitivity(const BetaBernoulliModel& model) {
  if (model.trunc <= 0.0) return Sensitivity::unbounded();
  return Sensitivity::finite(-std::log(model.trunc) +
                             std::log1p(-model.trunc));
}

Sensitivity exp_mech_sensitivity(const CategoricalDirichletModel& model) {
  if (model.trunc <= 0.0) return Sensitivity::unbounded();
  // Max over the truncated simplex of log(theta_j / theta_k): one component
  // at the floor a0, another at 1 - (K-1) * a0.
  const double top =
      1.0 - static_cast<double>(model.dim - 1) * model.trunc;
  return Sensitivity::finite(std::log(top / model.trunc));
}

Sensitivity exp_mech_sensitivity(const UnboundedStatModel&) {
  return Sensitivity::unbounded();
}

SensitivityReport sensitivity_report(const BetaBernoulliModel& model) {
  return SensitivityReport{l1_stat_sensitivity(model),
                           exp_mech_sensitivity(model)};
}

SensitivityReport sensitivity_report(const CategoricalDirichletModel& model) {
  return SensitivityReport{l1_stat_sensitivity(model),
                           exp_mech_sensitivity(model)};
}

SensitivityReport sensitivity_report(const UnboundedStatModel& model) {
  return SensitivityReport{l1_stat_sensitivity(model),
                           exp_mech_sensitivity(model)};
}

double laplace_scale(const Sensitivity& sensitivity, double epsilon) {
  if (!sensitivity.is_finite()) {
    throw UnboundedSensitivityError("cannot privatize an unbounded statistic");
  }
  if (!(epsilon > 0.0)) {
    throw std::domain_error("laplace_scale: epsilon must be > 0");
  }
  if (!(sensitivity.value() > 0.0)) {
    throw std::domain_error("laplace_scale: sensitivity must be > 0");
  }
  return sensitivity.value() / epsilon;
}

SuffStats privatize_stats(const BetaBernoulliModel& model,
                          const SuffStats& stats, double epsilon, Rng& rng) {
  if (stats.stats.size() != 2) {
    throw std::invalid_argument("privatize_stats: dimension mismatch");
  }
  return privatize_impl(model, stats, epsilon, rng);
}

SuffStats privatize_stats(const CategoricalDirichletModel& model,
                          const SuffStats& stats, double epsilon, Rng& rng) {
  if (stats.stats.size() != static_cast<std::size_t>(model.dim)) {
    throw std::invalid_argument("privatize_stats: dimension mismatch");
  }
  return privatize_impl(model, stats, epsilon, rng);
}

TemperedSampleSpec ops_temperature(const BetaBernoulliModel& model,
                                   double epsilon) {
  return ops_temperature_impl(model, epsilon);
}

TemperedSampleSpec ops_temperature(const CategoricalDirichletModel& model,
                                   double epsilon) {
  return ops_temperature_impl(model, epsilon);
}

PosteriorParams tempered_posterior(const PosteriorParams& post,
                                   double temperature) {
  if (!(temperature >= 1.0)) {
    throw std::domain_error("tempered_posterior: temperature must be >= 1");
  }
  PosteriorParams tempered = post;
  for (double& e : tempered.eta_stats) e /= temperature;
  return tempered;
}

double ops_sample(const BetaBernoulliModel& model, const PosteriorParams& post,
                  const TemperedSampleSpec& spec, Rng& rng) {
  check_ops_preconditions(model.trunc, spec);
  return sample_posterior(model, tempered_posterior(post, spec.temperature),
                          rng);
}

std::vector<double> ops_sample(const CategoricalDirichletModel& model,
                               const PosteriorParams& post,
                               const TemperedSampleSpec& spec, Rng& rng) {
  check_ops_preconditions(model.trunc, spec);
  return sample_posterior(model, tempered_posterior(post, spec.temperature),
                          rng);
}

}  // namespace dpbayes
