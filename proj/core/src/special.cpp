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

#include "dpbayes/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>

namespace dpbayes {

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_multivariate_beta(const std::vector<double>& alpha) {
  double sum = 0.0;
  double out = 0.0;
  for (double a : alpha) {
    out += std::lgamma(a);
    sum += a;
  }
  return out - std::lgamma(sum);
}

double digamma(double x) { return boost::math::digamma(x); }

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double reg_inc_beta_complement(double a, double b, double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return boost::math::ibetac(a, b, x);
}

double beta_pdf(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) return 0.0;
  if (x == 0.0 || x == 1.0) {
    // Only finite when the corresponding shape exceeds 1.
    if (x == 0.0) return a > 1.0 ? 0.0 : (a == 1.0 ? b : std::numeric_limits<double>::infinity());
    return b > 1.0 ? 0.0 : (b == 1.0 ? a : std::numeric_limits<double>::infinity());
  }
  return boost::math::ibeta_derivative(a, b, x);
}

double beta_interval_mass(double a, double b, double lo, double hi) {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, 1.0);
  if (hi <= lo) return 0.0;
  const double ilo = reg_inc_beta(a, b, lo);
  if (ilo > 0.5) {
    // Both CDF values sit in the upper half; subtract the complements, which
    // are the small well-separated quantities.
    return reg_inc_beta_complement(a, b, lo) - reg_inc_beta_complement(a, b, hi);
  }
  return reg_inc_beta(a, b, hi) - ilo;
}

double log_beta_interval_mass(double a, double b, double lo, double hi) {
  const double mass = beta_interval_mass(a, b, lo, hi);
  if (!(mass > 0.0)) {
    throw std::domain_error(
        "log_beta_interval_mass: interval carries zero probability mass");
  }
  return std::log(mass);
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol) {
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, lo, hi, 12, rel_tol);
}

double logsumexp(const std::vector<double>& xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

}  // namespace dpbayes
