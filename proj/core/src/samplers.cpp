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

#include "dpbayes/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpbayes/special.hpp"

namespace dpbayes {

double laplace_quantile(double u, double scale) {
  if (!(scale > 0.0)) {
    throw std::domain_error("laplace_quantile: scale must be > 0");
  }
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("laplace_quantile: u must lie in (0, 1)");
  }
  if (u == 0.5) return 0.0;
  return u < 0.5 ? scale * std::log(2.0 * u)
                 : -scale * std::log(2.0 * (1.0 - u));
}

double laplace_draw(double scale, Rng& rng) {
  return laplace_quantile(rng.uniform(), scale);
}

double truncated_beta_quantile(double a, double b, double lo, double hi,
                               double q) {
  if (!(a > 0.0 && b > 0.0)) {
    throw std::domain_error("truncated_beta_quantile: shapes must be > 0");
  }
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    throw std::domain_error(
        "truncated_beta_quantile: require 0 <= lo < hi <= 1");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("truncated_beta_quantile: q must lie in [0, 1]");
  }

  // Work in whichever tail of the CDF is well conditioned (the same rule as
  // beta_interval_mass): g is increasing in x and crosses zero at the answer.
  const double f_lo = reg_inc_beta(a, b, lo);
  const bool use_complement = f_lo > 0.5;
  std::function<double(double)> g;
  if (use_complement) {
    const double c_lo = reg_inc_beta_complement(a, b, lo);
    const double c_hi = reg_inc_beta_complement(a, b, hi);
    const double target = c_lo - q * (c_lo - c_hi);
    g = [=](double x) { return target - reg_inc_beta_complement(a, b, x); };
  } else {
    const double f_hi = reg_inc_beta(a, b, hi);
    const double target = f_lo + q * (f_hi - f_lo);
    g = [=](double x) { return reg_inc_beta(a, b, x) - target; };
  }

  double left = lo;
  double right = hi;
  for (int iter = 0; iter < 200 && right - left > 1e-13; ++iter) {
    const double mid = 0.5 * (left + right);
    if (g(mid) < 0.0) {
      left = mid;
    } else {
      right = mid;
    }
  }
  // Newton polish inside the final bracket.
  double x = 0.5 * (left + right);
  for (int iter = 0; iter < 3; ++iter) {
    const double density = beta_pdf(a, b, x);
    if (!(density > 0.0) || !std::isfinite(density)) break;
    const double step = g(x) / density;
    const double next = x - step;
    if (!(next > left && next < right)) break;
    x = next;
  }
  return std::clamp(x, lo, hi);
}

double truncated_beta_draw(double a, double b, double lo, double hi,
                           Rng& rng) {
  return truncated_beta_quantile(a, b, lo, hi, rng.uniform());
}

std::vector<double> truncated_dirichlet_draw(const std::vector<double>& alphas,
                                             double a0, Rng& rng) {
  const std::size_t k = alphas.size();
  if (k < 2) {
    throw std::domain_error("truncated_dirichlet_draw: need >= 2 components");
  }
  for (double a : alphas) {
    if (!(a > 0.0)) {
      throw std::domain_error("truncated_dirichlet_draw: shapes must be > 0");
    }
  }
  if (!(a0 >= 0.0) || a0 * static_cast<double>(k) >= 1.0) {
    throw std::domain_error(
        "truncated_dirichlet_draw: floor a0 must satisfy 0 <= a0 < 1/K");
  }

  std::vector<double> theta(k);
  std::vector<double> tail(k);
  tail[k - 1] = alphas[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) tail[i] = tail[i + 1] + alphas[i];

  double remaining = 1.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const double m = static_cast<double>(k - 1 - i);
    // Stick proportion v = theta_i / remaining, bounded so this component
    // reaches its floor and enough mass is left for the floors below it.
    const double v_lo = a0 > 0.0 ? a0 / remaining : 0.0;
    const double v_hi =
        a0 > 0.0 ? (remaining - m * a0) / remaining : 1.0;
    if (!(v_lo < v_hi)) {
      throw std::domain_error(
          "truncated_dirichlet_draw: floor infeasible at this stick");
    }
    const double v =
        truncated_beta_draw(alphas[i], tail[i + 1], v_lo, v_hi, rng);
    theta[i] = remaining * v;
    remaining -= theta[i];
  }
  theta[k - 1] = remaining;
  // Absorb rounding drift into the final component and re-assert the floor.
  double sum = 0.0;
  for (double t : theta) sum += t;
  theta[k - 1] += 1.0 - sum;
  if (a0 > 0.0 && theta[k - 1] < a0) theta[k - 1] = a0;
  return theta;
}

std::size_t exp_mech_gibbs_draw(const std::vector<double>& utilities,
                                double delta_log, double epsilon, Rng& rng) {
  if (utilities.empty()) {
    throw std::domain_error("exp_mech_gibbs_draw: empty support");
  }
  if (!(delta_log > 0.0) || !(epsilon > 0.0)) {
    throw std::domain_error(
        "exp_mech_gibbs_draw: delta_log and epsilon must be > 0");
  }
  const double scale = epsilon / (2.0 * delta_log);
  const double u_max = *std::max_element(utilities.begin(), utilities.end());
  if (!std::isfinite(u_max)) {
    throw std::domain_error("exp_mech_gibbs_draw: utilities must be finite");
  }
  std::vector<double> probs(utilities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    probs[i] = std::exp(scale * (utilities[i] - u_max));
    total += probs[i];
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u <= acc) return i;
  }
  return probs.size() - 1;
}

MetropolisResult metropolis_update(
    const std::function<double(double)>& log_joint, double delta_log,
    double epsilon, const std::function<double(double, Rng&)>& proposal,
    double theta, Rng& rng, int reject_probe_count) {
  if (!(delta_log > 0.0) || !(epsilon > 0.0)) {
    throw std::domain_error(
        "metropolis_update: delta_log and epsilon must be > 0");
  }
  if (reject_probe_count < 1) {
    throw std::domain_error("metropolis_update: need at least one probe");
  }
  const double temperature = 2.0 * delta_log / epsilon;
  const double here = log_joint(theta);
  if (!std::isfinite(here)) {
    throw std::domain_error(
        "metropolis_update: log_joint not finite at the current point");
  }
  const auto accept_prob = [&](double candidate) {
    const double there = log_joint(candidate);
    if (there == -std::numeric_limits<double>::infinity()) return 0.0;
    return std::min(1.0, std::exp((there - here) / temperature));
  };

  MetropolisResult out;
  const double candidate = proposal(theta, rng);
  const double p_accept = accept_prob(candidate);
  out.accepted = rng.uniform() < p_accept;
  out.theta = out.accepted ? candidate : theta;

  double reject_mass = 0.0;
  for (int m = 0; m < reject_probe_count; ++m) {
    reject_mass += 1.0 - accept_prob(proposal(theta, rng));
  }
  out.delta_estimate = reject_mass / reject_probe_count;
  return out;
}

std::vector<double> AnnealingSchedule::betas() const {
  std::vector<double> out(epsilons.size());
  for (std::size_t j = 0; j < epsilons.size(); ++j) {
    out[j] = std::clamp(epsilons[j] / (2.0 * delta_log), 0.0, 1.0);
  }
  return out;
}

void AnnealingSchedule::validate() const {
  if (epsilons.empty()) {
    throw std::domain_error("AnnealingSchedule: empty schedule");
  }
  if (!(delta_log > 0.0)) {
    throw std::domain_error("AnnealingSchedule: delta_log must be > 0");
  }
  for (std::size_t j = 0; j < epsilons.size(); ++j) {
    if (!(epsilons[j] >= 0.0) || !std::isfinite(epsilons[j])) {
      throw std::domain_error("AnnealingSchedule: epsilons must be >= 0");
    }
    if (j > 0 && epsilons[j] > epsilons[j - 1]) {
      throw std::domain_error(
          "AnnealingSchedule: epsilons must be nonincreasing");
    }
  }
}

AisResult ais_run(const AnnealingSchedule& schedule,
                  const std::function<double(double)>& log_joint,
                  const std::function<double(std::size_t, double, Rng&)>& kernel,
                  const std::function<double(Rng&)>& initial_draw,
                  std::size_t n_samples, bool per_variable_sequential,
                  std::size_t n_variables, Rng& rng) {
  schedule.validate();
  if (per_variable_sequential && n_variables == 0) {
    throw std::domain_error("ais_run: n_variables must be >= 1");
  }
  const std::vector<double> betas = schedule.betas();
  const std::size_t n = betas.size() - 1;

  AisResult out;
  out.samples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng r = rng.stream(i);
    double theta = initial_draw(r);
    double log_weight = 0.0;
    if (n >= 1) {
      log_weight += (betas[n - 1] - betas[n]) * log_joint(theta);
      for (std::size_t j = n - 1; j >= 1; --j) {
        theta = kernel(j, theta, r);
        log_weight += (betas[j - 1] - betas[j]) * log_joint(theta);
      }
      theta = kernel(0, theta, r);
    }
    out.samples.push_back(WeightedSample{theta, log_weight});
  }

  double eps_sum = 0.0;
  for (double e : schedule.epsilons) eps_sum += e;
  const double factor =
      per_variable_sequential ? static_cast<double>(n_variables) : 1.0;
  out.cost =
      PrivacyCost{static_cast<double>(n_samples) * factor * eps_sum, 0.0};
  return out;
}

PrivatizedWeights privatize_weights(const std::vector<double>& log_weights,
                                    double epsilon, Rng& rng) {
  if (log_weights.empty()) {
    throw std::domain_error("privatize_weights: empty weight vector");
  }
  if (!(epsilon > 0.0)) {
    throw std::domain_error("privatize_weights: epsilon must be > 0");
  }
  for (double lw : log_weights) {
    if (!std::isfinite(lw)) {
      throw std::domain_error("privatize_weights: log weights must be finite");
    }
  }
  const double norm = logsumexp(log_weights);
  PrivatizedWeights out;
  out.weights.resize(log_weights.size());
  const double scale = 2.0 / epsilon;
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double noised =
        std::exp(log_weights[i] - norm) + laplace_draw(scale, rng);
    out.weights[i] = std::max(noised, 0.0);
    total += out.weights[i];
  }
  if (total <= 0.0) {
    const double uniform = 1.0 / static_cast<double>(out.weights.size());
    std::fill(out.weights.begin(), out.weights.end(), uniform);
    out.fallback_uniform = true;
    return out;
  }
  for (double& w : out.weights) w /= total;
  return out;
}

}  // namespace dpbayes
