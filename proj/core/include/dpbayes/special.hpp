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

#ifndef DPBAYES_SPECIAL_HPP_
#define DPBAYES_SPECIAL_HPP_

#include <functional>
#include <vector>

namespace dpbayes {

// log B(a, b) = lgamma(a) + lgamma(b) - lgamma(a + b).
double log_beta(double a, double b);

// log of the multivariate beta function for a Dirichlet with the given
// concentration vector.
double log_multivariate_beta(const std::vector<double>& alpha);

double digamma(double x);

// Regularized incomplete beta function I_x(a, b) and its complement.
double reg_inc_beta(double a, double b, double x);
double reg_inc_beta_complement(double a, double b, double x);

// Beta(a, b) density at x (not log).
double beta_pdf(double a, double b, double x);

// Pr[lo <= X <= hi] for X ~ Beta(a, b), evaluated so that the two tails are
// never subtracted when both are close to 1.  When I(lo) > 1/2 the mass is
// formed from the complements (1 - I(lo)) - (1 - I(hi)); otherwise directly
// as I(hi) - I(lo).  Either branch subtracts quantities on the same side of
// 1/2, which keeps the result monotone in (a, b) to near machine precision.
double beta_interval_mass(double a, double b, double lo, double hi);

// log of beta_interval_mass; throws std::domain_error if the mass underflows
// to zero (the interval carries no representable probability).
double log_beta_interval_mass(double a, double b, double lo, double hi);

// Adaptive Gauss-Kronrod quadrature of f over [lo, hi].
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol = 1e-10);

double logsumexp(const std::vector<double>& xs);

}  // namespace dpbayes

#endif  // DPBAYES_SPECIAL_HPP_
