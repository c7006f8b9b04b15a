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

#include "dpbayes/expfam.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "dpbayes/samplers.hpp"
#include "dpbayes/special.hpp"

namespace dpbayes {

namespace {

constexpr double kShapeFloor = 1e-6;

void validate_model(const BetaBernoulliModel& model) {
  if (!(model.trunc >= 0.0 && model.trunc < 0.5)) {
    throw std::domain_error("BetaBernoulliModel: trunc must lie in [0, 0.5)");
  }
}

void validate_model(const CategoricalDirichletModel& model) {
  if (model.dim < 2) {
    throw std::domain_error("CategoricalDirichletModel: dim must be >= 2");
  }
  if (!(model.trunc >= 0.0 && model.trunc < 1.0 / model.dim)) {
    throw std::domain_error(
        "CategoricalDirichletModel: trunc must lie in [0, 1/dim)");
  }
}

void check_dim(const PosteriorParams& post, std::size_t d,
               const char* where) {
  if (post.eta_stats.size() != d) {
    throw std::invalid_argument(std::string(where) +
                                ": posterior dimension mismatch");
  }
}

// Shapes for density/mean/KL evaluation: unlike the sampling boundary, a
// non-positive shape is always rejected here, privatized or not.
std::vector<double> strict_shapes(const PosteriorParams& post,
                                  const char* where) {
  std::vector<double> shapes(post.eta_stats.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    shapes[i] = post.eta_stats[i] + 1.0;
    if (!(shapes[i] > 0.0)) {
      throw std::domain_error(std::string(where) +
                              ": improper posterior (shape <= 0)");
    }
  }
  return shapes;
}

// log of the un-normalized beta kernel t^(a-1) (1-t)^(b-1).
double log_beta_kernel(double a, double b, double t) {
  return (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t);
}

std::string mass_cache_key(const std::vector<double>& alphas, double a0) {
  std::string key(sizeof(double) * (alphas.size() + 1), '\0');
  std::memcpy(key.data(), alphas.data(), sizeof(double) * alphas.size());
  std::memcpy(key.data() + sizeof(double) * alphas.size(), &a0,
              sizeof(double));
  return key;
}

// Pr[all components >= a0] for Dirichlet(alphas[j..]) via the marginal
// decomposition: condition on the first component t, rescale the remainder
// to a simplex with floor a0 / (1 - t), recurse.
double trunc_mass_rec(const std::vector<double>& alphas, std::size_t j,
                      double a0) {
  const std::size_t k = alphas.size() - j;
  if (a0 <= 0.0) return 1.0;
  if (k == 2) {
    return beta_interval_mass(alphas[j], alphas[j + 1], a0, 1.0 - a0);
  }
  double rest = 0.0;
  for (std::size_t i = j + 1; i < alphas.size(); ++i) rest += alphas[i];
  const double lo = a0;
  const double hi = 1.0 - static_cast<double>(k - 1) * a0;
  if (!(hi > lo)) return 0.0;
  const double a = alphas[j];
  return integrate(
      [&](double t) {
        return beta_pdf(a, rest, t) *
               trunc_mass_rec(alphas, j + 1, a0 / (1.0 - t));
      },
      lo, hi, 1e-10);
}

}  // namespace

double truncated_dirichlet_mass(const std::vector<double>& alphas,
                                double a0) {
  if (alphas.size() < 2) {
    throw std::domain_error("truncated_dirichlet_mass: need >= 2 components");
  }
  for (double a : alphas) {
    if (!(a > 0.0)) {
      throw std::domain_error("truncated_dirichlet_mass: shapes must be > 0");
    }
  }
  if (a0 <= 0.0) return 1.0;
  if (!(a0 < 1.0 / static_cast<double>(alphas.size()))) {
    throw std::domain_error("truncated_dirichlet_mass: infeasible floor");
  }
  thread_local std::unordered_map<std::string, double> cache;
  const std::string key = mass_cache_key(alphas, a0);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const double mass = trunc_mass_rec(alphas, 0, a0);
  if (cache.size() > 4096) cache.clear();
  cache.emplace(key, mass);
  return mass;
}

std::vector<double> shape_parameters(const PosteriorParams& post,
                                     bool* shape_clamped) {
  std::vector<double> shapes(post.eta_stats.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    shapes[i] = post.eta_stats[i] + 1.0;
    if (shapes[i] < kShapeFloor) {
      if (!post.privatized) {
        throw std::domain_error(
            "shape_parameters: improper posterior (shape <= 0)");
      }
      shapes[i] = kShapeFloor;
      if (shape_clamped != nullptr) *shape_clamped = true;
    }
  }
  return shapes;
}

SuffStats aggregate_stats(const BetaBernoulliModel& model,
                          const std::vector<int>& data) {
  validate_model(model);
  SuffStats out;
  out.stats.assign(2, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] != 0 && data[i] != 1) {
      throw std::domain_error("aggregate_stats: record " + std::to_string(i) +
                              " is not a binary outcome");
    }
    out.stats[0] += data[i];
    out.stats[1] += 1 - data[i];
  }
  out.count = static_cast<double>(data.size());
  return out;
}

SuffStats aggregate_stats(const CategoricalDirichletModel& model,
                          const std::vector<int>& data) {
  validate_model(model);
  SuffStats out;
  out.stats.assign(static_cast<std::size_t>(model.dim), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] < 1 || data[i] > model.dim) {
      throw std::domain_error("aggregate_stats: record " + std::to_string(i) +
                              " is outside {1.." + std::to_string(model.dim) +
                              "}");
    }
    out.stats[static_cast<std::size_t>(data[i] - 1)] += 1.0;
  }
  out.count = static_cast<double>(data.size());
  return out;
}

PosteriorParams update_posterior(const ConjugatePrior& prior,
                                 const SuffStats& stats) {
  if (!(prior.alpha > 0.0)) {
    throw std::domain_error("update_posterior: prior alpha must be > 0");
  }
  if (prior.chi.size() != stats.stats.size()) {
    throw std::invalid_argument("update_posterior: dimension mismatch");
  }
  PosteriorParams post;
  post.eta_stats.resize(stats.stats.size());
  for (std::size_t i = 0; i < stats.stats.size(); ++i) {
    post.eta_stats[i] = prior.alpha * prior.chi[i] + stats.stats[i];
  }
  post.eta_count = prior.alpha + stats.count;
  post.privatized = stats.privatized;
  return post;
}

double posterior_log_pdf(const BetaBernoulliModel& model,
                         const PosteriorParams& post, double theta) {
  validate_model(model);
  check_dim(post, 2, "posterior_log_pdf");
  const std::vector<double> shapes = strict_shapes(post, "posterior_log_pdf");
  const double lo = model.trunc;
  const double hi = 1.0 - model.trunc;
  const bool inside = model.trunc > 0.0 ? (theta >= lo && theta <= hi)
                                        : (theta > 0.0 && theta < 1.0);
  if (!inside) {
    throw std::domain_error("posterior_log_pdf: theta outside support");
  }
  double out = log_beta_kernel(shapes[0], shapes[1], theta) -
               log_beta(shapes[0], shapes[1]);
  if (model.trunc > 0.0) {
    out -= log_beta_interval_mass(shapes[0], shapes[1], lo, hi);
  }
  return out;
}

double posterior_log_pdf(const CategoricalDirichletModel& model,
                         const PosteriorParams& post,
                         const std::vector<double>& theta) {
  validate_model(model);
  check_dim(post, static_cast<std::size_t>(model.dim), "posterior_log_pdf");
  if (theta.size() != static_cast<std::size_t>(model.dim)) {
    throw std::invalid_argument("posterior_log_pdf: theta dimension mismatch");
  }
  const std::vector<double> shapes = strict_shapes(post, "posterior_log_pdf");
  double sum = 0.0;
  for (double t : theta) {
    const bool inside = model.trunc > 0.0 ? t >= model.trunc : t > 0.0;
    if (!inside || t >= 1.0) {
      throw std::domain_error("posterior_log_pdf: theta outside support");
    }
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::domain_error("posterior_log_pdf: theta is not a simplex point");
  }
  double out = -log_multivariate_beta(shapes);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    out += (shapes[i] - 1.0) * std::log(theta[i]);
  }
  if (model.trunc > 0.0) {
    const double mass = truncated_dirichlet_mass(shapes, model.trunc);
    if (!(mass > 0.0)) {
      throw std::domain_error(
          "posterior_log_pdf: truncated support carries no mass");
    }
    out -= std::log(mass);
  }
  return out;
}

double sample_posterior(const BetaBernoulliModel& model,
                        const PosteriorParams& post, Rng& rng,
                        bool* shape_clamped) {
  validate_model(model);
  check_dim(post, 2, "sample_posterior");
  const std::vector<double> shapes = shape_parameters(post, shape_clamped);
  return truncated_beta_draw(shapes[0], shapes[1], model.trunc,
                             1.0 - model.trunc, rng);
}

std::vector<double> sample_posterior(const CategoricalDirichletModel& model,
                                     const PosteriorParams& post, Rng& rng,
                                     bool* shape_clamped) {
  validate_model(model);
  check_dim(post, static_cast<std::size_t>(model.dim), "sample_posterior");
  const std::vector<double> shapes = shape_parameters(post, shape_clamped);
  return truncated_dirichlet_draw(shapes, model.trunc, rng);
}

double posterior_mean(const BetaBernoulliModel& model,
                      const PosteriorParams& post) {
  validate_model(model);
  check_dim(post, 2, "posterior_mean");
  const std::vector<double> shapes = strict_shapes(post, "posterior_mean");
  const double a = shapes[0];
  const double b = shapes[1];
  if (model.trunc == 0.0) return a / (a + b);
  const double lo = model.trunc;
  const double hi = 1.0 - model.trunc;
  const double num =
      integrate([&](double t) { return t * beta_pdf(a, b, t); }, lo, hi, 1e-8);
  return num / beta_interval_mass(a, b, lo, hi);
}

std::vector<double> posterior_mean(const CategoricalDirichletModel& model,
                                   const PosteriorParams& post) {
  validate_model(model);
  check_dim(post, static_cast<std::size_t>(model.dim), "posterior_mean");
  std::vector<double> shapes = strict_shapes(post, "posterior_mean");
  double total = 0.0;
  for (double s : shapes) total += s;
  std::vector<double> mean(shapes.size());
  if (model.trunc == 0.0) {
    for (std::size_t i = 0; i < shapes.size(); ++i) mean[i] = shapes[i] / total;
    return mean;
  }
  // E[theta_i] = (alpha_i / alpha_0) * M(alpha + e_i) / M(alpha): bumping
  // shape i by one converts the extra theta_i factor into a normalization
  // ratio of truncated masses.
  const double base = truncated_dirichlet_mass(shapes, model.trunc);
  if (!(base > 0.0)) {
    throw std::domain_error("posterior_mean: truncated support has no mass");
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const double alpha_i = shapes[i];
    shapes[i] += 1.0;
    mean[i] = (alpha_i / total) *
              (truncated_dirichlet_mass(shapes, model.trunc) / base);
    shapes[i] = alpha_i;
  }
  return mean;
}

double kl_divergence(const BetaBernoulliModel& model,
                     const PosteriorParams& post_a,
                     const PosteriorParams& post_b) {
  validate_model(model);
  check_dim(post_a, 2, "kl_divergence");
  check_dim(post_b, 2, "kl_divergence");
  const std::vector<double> sa = strict_shapes(post_a, "kl_divergence");
  const std::vector<double> sb = strict_shapes(post_b, "kl_divergence");
  if (model.trunc == 0.0) {
    const double a1 = sa[0], b1 = sa[1], a2 = sb[0], b2 = sb[1];
    return log_beta(a2, b2) - log_beta(a1, b1) +
           (a1 - a2) * digamma(a1) + (b1 - b2) * digamma(b1) +
           (a2 - a1 + b2 - b1) * digamma(a1 + b1);
  }
  const double lo = model.trunc;
  const double hi = 1.0 - model.trunc;
  const double log_za =
      log_beta(sa[0], sa[1]) + log_beta_interval_mass(sa[0], sa[1], lo, hi);
  const double log_zb =
      log_beta(sb[0], sb[1]) + log_beta_interval_mass(sb[0], sb[1], lo, hi);
  return integrate(
      [&](double t) {
        const double la = log_beta_kernel(sa[0], sa[1], t) - log_za;
        const double lb = log_beta_kernel(sb[0], sb[1], t) - log_zb;
        return std::exp(la) * (la - lb);
      },
      lo, hi, 1e-6);
}

double kl_divergence(const CategoricalDirichletModel& model,
                     const PosteriorParams& post_a,
                     const PosteriorParams& post_b) {
  validate_model(model);
  const std::size_t d = static_cast<std::size_t>(model.dim);
  check_dim(post_a, d, "kl_divergence");
  check_dim(post_b, d, "kl_divergence");
  std::vector<double> sa = strict_shapes(post_a, "kl_divergence");
  const std::vector<double> sb = strict_shapes(post_b, "kl_divergence");
  double a0_sum = 0.0;
  for (double s : sa) a0_sum += s;
  double kl = log_multivariate_beta(sb) - log_multivariate_beta(sa);
  if (model.trunc > 0.0) {
    kl += std::log(truncated_dirichlet_mass(sb, model.trunc)) -
          std::log(truncated_dirichlet_mass(sa, model.trunc));
  }
  for (std::size_t i = 0; i < d; ++i) {
    // E_a[log theta_i] = d/d(shape_i) log Z(shapes); for the truncated family
    // the mass term's derivative is taken by central difference.
    double e_log = digamma(sa[i]) - digamma(a0_sum);
    if (model.trunc > 0.0) {
      const double h = 1e-4;
      sa[i] += h;
      const double up = std::log(truncated_dirichlet_mass(sa, model.trunc));
      sa[i] -= 2.0 * h;
      const double dn = std::log(truncated_dirichlet_mass(sa, model.trunc));
      sa[i] += h;
      e_log += (up - dn) / (2.0 * h);
    }
    kl += (sa[i] - sb[i]) * e_log;
  }
  return kl;
}

}  // namespace dpbayes
