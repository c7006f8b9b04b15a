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

#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "dpbayes/errors.hpp"
#include "dpbayes/special.hpp"
#include "testutil.hpp"

namespace dpbayes {
namespace {

PosteriorParams make_post(std::vector<double> eta, bool privatized = false) {
  PosteriorParams post;
  post.eta_stats = std::move(eta);
  post.eta_count = 0.0;
  for (double e : post.eta_stats) post.eta_count += e;
  post.eta_count += 1.0;
  post.privatized = privatized;
  return post;
}

TEST(SensitivityTest, L1StatSensitivityIsTwo) {
  EXPECT_DOUBLE_EQ(l1_stat_sensitivity(BetaBernoulliModel{0.0}).value(), 2.0);
  EXPECT_DOUBLE_EQ(l1_stat_sensitivity(BetaBernoulliModel{0.2}).value(), 2.0);
  EXPECT_DOUBLE_EQ(
      l1_stat_sensitivity(CategoricalDirichletModel{7, 0.0}).value(), 2.0);
  EXPECT_FALSE(l1_stat_sensitivity(UnboundedStatModel{}).is_finite());
}

TEST(SensitivityTest, CategoricalL1MatchesBruteForce) {
  // Replacing one record swaps one indicator for another: the L1 change is
  // ||e_j - e_k||_1 over all outcome pairs.
  const int k = 7;
  double worst = 0.0;
  for (int j = 0; j < k; ++j) {
    for (int l = 0; l < k; ++l) {
      double diff = 0.0;
      for (int c = 0; c < k; ++c) {
        diff += std::abs((c == j ? 1.0 : 0.0) - (c == l ? 1.0 : 0.0));
      }
      worst = std::max(worst, diff);
    }
  }
  EXPECT_DOUBLE_EQ(l1_stat_sensitivity(CategoricalDirichletModel{k, 0.0}).value(),
                   worst);
}

TEST(SensitivityTest, ExpMechBetaValues) {
  EXPECT_NEAR(exp_mech_sensitivity(BetaBernoulliModel{0.2}).value(),
              1.3862943611198906, 1e-12);
  EXPECT_NEAR(exp_mech_sensitivity(BetaBernoulliModel{0.05}).value(),
              2.9444389791664403, 1e-12);
  EXPECT_FALSE(exp_mech_sensitivity(BetaBernoulliModel{0.0}).is_finite());
  EXPECT_THROW(exp_mech_sensitivity(BetaBernoulliModel{0.0}).value(),
               UnboundedSensitivityError);
}

TEST(SensitivityTest, ExpMechBetaStrictlyDecreasingInFloor) {
  double prev = exp_mech_sensitivity(BetaBernoulliModel{0.01}).value();
  for (double a0 = 0.02; a0 < 0.5; a0 += 0.01) {
    const double cur = exp_mech_sensitivity(BetaBernoulliModel{a0}).value();
    ASSERT_LT(cur, prev);
    prev = cur;
  }
}

TEST(SensitivityTest, ExpMechCategoricalMatchesGridSearch) {
  // sup over theta on the truncated simplex and over outcome pairs (j, k) of
  // log(theta_j / theta_k), evaluated by grid search at K = 3, a0 = 0.1.
  const CategoricalDirichletModel model{3, 0.1};
  const double a0 = model.trunc;
  double worst = 0.0;
  const int grid = 200;
  for (int i = 0; i <= grid; ++i) {
    const double t0 = a0 + (1.0 - 3.0 * a0) * i / grid;
    for (int j = 0; i + j <= grid; ++j) {
      const double t1 = a0 + (1.0 - 3.0 * a0) * j / grid;
      const double t2 = 1.0 - t0 - t1;
      if (t2 < a0 - 1e-12) continue;
      const double mx = std::max({t0, t1, t2});
      const double mn = std::min({t0, t1, t2});
      worst = std::max(worst, std::log(mx / mn));
    }
  }
  EXPECT_NEAR(exp_mech_sensitivity(model).value(), worst, 1e-9);
  EXPECT_NEAR(exp_mech_sensitivity(model).value(), std::log(8.0), 1e-12);
}

TEST(LaplaceScaleTest, RatioAndErrors) {
  EXPECT_DOUBLE_EQ(laplace_scale(Sensitivity::finite(2.0), 0.1), 20.0);
  EXPECT_DOUBLE_EQ(laplace_scale(Sensitivity::finite(2.0), 2.0), 1.0);
  EXPECT_THROW(laplace_scale(Sensitivity::unbounded(), 1.0),
               UnboundedSensitivityError);
  EXPECT_THROW(laplace_scale(Sensitivity::finite(2.0), 0.0),
               std::domain_error);
}

TEST(PrivatizeStatsTest, VanishingNoiseLimit) {
  Rng rng(139);
  SuffStats stats;
  stats.stats = {7.0, 13.0};
  stats.count = 20.0;
  const auto out = privatize_stats(BetaBernoulliModel{}, stats, 1e6, rng);
  EXPECT_NEAR(out.stats[0], 7.0, 1e-3);
  EXPECT_NEAR(out.stats[1], 13.0, 1e-3);
  EXPECT_EQ(out.count, 20.0);
  EXPECT_TRUE(out.privatized);
}

TEST(PrivatizeStatsTest, ProjectionClampsAtZero) {
  Rng rng(149);
  SuffStats stats;
  stats.stats = {0.0, 5.0};
  stats.count = 5.0;
  bool saw_clamp = false;
  for (int i = 0; i < 1000; ++i) {
    const auto out = privatize_stats(BetaBernoulliModel{}, stats, 0.5, rng);
    ASSERT_GE(out.stats[0], 0.0);
    ASSERT_GE(out.stats[1], 0.0);
    saw_clamp = saw_clamp || out.stats[0] == 0.0;
  }
  EXPECT_TRUE(saw_clamp);
}

TEST(PrivatizeStatsTest, NoiseMomentsBeforeClamping) {
  Rng rng(151);
  SuffStats stats;
  stats.stats = {50.0, 50.0};
  stats.count = 100.0;
  const int n = 10000;
  std::vector<double> noise0(n), noise1(n);
  for (int i = 0; i < n; ++i) {
    const auto out = privatize_stats(BetaBernoulliModel{}, stats, 1.0, rng);
    noise0[i] = out.stats[0] - 50.0;
    noise1[i] = out.stats[1] - 50.0;
  }
  // b = 2 / 1, variance 2 b^2 = 8; 3 standard errors of the mean.
  const double se = std::sqrt(8.0 / n);
  EXPECT_NEAR(testutil::mean(noise0), 0.0, 3.0 * se);
  EXPECT_NEAR(testutil::mean(noise1), 0.0, 3.0 * se);
  EXPECT_NEAR(testutil::variance(noise0), 8.0, 0.05 * 8.0);
  EXPECT_NEAR(testutil::variance(noise1), 8.0, 0.05 * 8.0);
}

TEST(PrivatizeStatsTest, CountCarriedThrough) {
  Rng rng(157);
  SuffStats stats;
  stats.stats = {1.0, 2.0, 3.0};
  stats.count = 6.0;
  const auto out =
      privatize_stats(CategoricalDirichletModel{3, 0.0}, stats, 1.0, rng);
  EXPECT_EQ(out.count, 6.0);
  EXPECT_TRUE(out.privatized);
}

TEST(OpsTemperatureTest, KnownSettingAndCapping) {
  const auto spec = ops_temperature(BetaBernoulliModel{0.2}, 1.0);
  EXPECT_NEAR(spec.temperature, 2.0 * std::log(4.0), 1e-12);
  EXPECT_DOUBLE_EQ(spec.epsilon_charged, 1.0);
  EXPECT_DOUBLE_EQ(spec.epsilon_unused, 0.0);

  const double two_delta = 2.0 * std::log(4.0);
  const auto capped = ops_temperature(BetaBernoulliModel{0.2}, two_delta);
  EXPECT_DOUBLE_EQ(capped.temperature, 1.0);
  EXPECT_DOUBLE_EQ(capped.epsilon_unused, 0.0);

  const auto over = ops_temperature(BetaBernoulliModel{0.2}, 10.0);
  EXPECT_DOUBLE_EQ(over.temperature, 1.0);
  EXPECT_DOUBLE_EQ(over.epsilon_charged, two_delta);
  EXPECT_NEAR(over.epsilon_unused, 10.0 - two_delta, 1e-12);

  const auto fig3 = ops_temperature(BetaBernoulliModel{0.05}, 0.1);
  EXPECT_NEAR(fig3.temperature, 58.888779583328805, 1e-9);

  EXPECT_THROW(ops_temperature(BetaBernoulliModel{0.0}, 1.0),
               UnboundedSensitivityError);
}

TEST(OpsSampleTest, UnitTemperatureMatchesExactPosterior) {
  const BetaBernoulliModel model{0.1};
  const auto post = make_post({3.0, 2.0});
  TemperedSampleSpec spec;
  spec.temperature = 1.0;
  const double lo = 0.1, hi = 0.9;
  const double mass = integrate(
      [&](double t) { return std::exp(posterior_log_pdf(model, post, t)); },
      lo, hi, 1e-10);
  const auto cdf = [&](double x) {
    return integrate(
               [&](double t) {
                 return std::exp(posterior_log_pdf(model, post, t));
               },
               lo, x, 1e-10) /
           mass;
  };
  Rng rng(163);
  std::vector<double> draws(10000);
  for (double& d : draws) d = ops_sample(model, post, spec, rng);
  EXPECT_LT(testutil::ks_statistic(std::move(draws), cdf), 0.02);
}

TEST(OpsSampleTest, TemperedExponentsMatchQuadratureCdf) {
  // Exponents (4,4) at T = 2 temper to p^2 (1-p)^2 on [0.2, 0.8].
  const BetaBernoulliModel model{0.2};
  const auto post = make_post({4.0, 4.0});
  TemperedSampleSpec spec;
  spec.temperature = 2.0;
  const double lo = 0.2, hi = 0.8;
  const auto kernel = [](double t) {
    return t * t * (1.0 - t) * (1.0 - t);
  };
  const double mass = integrate(kernel, lo, hi, 1e-12);
  const auto cdf = [&](double x) {
    return integrate(kernel, lo, x, 1e-12) / mass;
  };
  Rng rng(167);
  std::vector<double> draws(10000);
  for (double& d : draws) d = ops_sample(model, post, spec, rng);
  EXPECT_LT(testutil::ks_statistic(std::move(draws), cdf), 0.02);
}

TEST(OpsSampleTest, InfiniteTemperatureIsUniformOnSupport) {
  const BetaBernoulliModel model{0.2};
  const auto post = make_post({30.0, 10.0});
  TemperedSampleSpec spec;
  spec.temperature = 1e6;
  const auto cdf = [](double x) { return (x - 0.2) / 0.6; };
  Rng rng(173);
  std::vector<double> draws(10000);
  for (double& d : draws) d = ops_sample(model, post, spec, rng);
  EXPECT_LT(testutil::ks_statistic(std::move(draws), cdf), 0.02);
}

TEST(OpsSampleTest, VarianceNondecreasingInTemperature) {
  const BetaBernoulliModel model{0.05};
  const auto post = make_post({12.0, 20.0});
  double prev = -1.0;
  for (double t : {1.0, 2.0, 4.0, 8.0}) {
    TemperedSampleSpec spec;
    spec.temperature = t;
    Rng rng(179 + static_cast<std::uint64_t>(t));
    std::vector<double> draws(10000);
    for (double& d : draws) d = ops_sample(model, post, spec, rng);
    const double var = testutil::variance(draws);
    EXPECT_GT(var, prev);
    prev = var;
  }
}

TEST(OpsSampleTest, RequiresTruncationWhenTempered) {
  const BetaBernoulliModel open{0.0};
  const auto post = make_post({3.0, 3.0});
  TemperedSampleSpec spec;
  spec.temperature = 2.0;
  Rng rng(181);
  EXPECT_THROW(ops_sample(open, post, spec, rng), std::domain_error);
  spec.temperature = 1.0;
  EXPECT_NO_THROW(ops_sample(open, post, spec, rng));
}

TEST(OpsSampleTest, DirichletTemperedDrawStaysOnTruncatedSimplex) {
  const CategoricalDirichletModel model{4, 0.05};
  const auto post = make_post({8.0, 4.0, 2.0, 2.0});
  const auto spec = ops_temperature(model, 1.0);
  Rng rng(191);
  for (int i = 0; i < 2000; ++i) {
    const auto theta = ops_sample(model, post, spec, rng);
    double sum = 0.0;
    for (double t : theta) {
      ASSERT_GE(t, 0.05);
      sum += t;
    }
    ASSERT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(SensitivityReportTest, BundlesBothSensitivities) {
  const auto report = sensitivity_report(BetaBernoulliModel{0.2});
  EXPECT_DOUBLE_EQ(report.l1.value(), 2.0);
  EXPECT_NEAR(report.exp_mech.value(), std::log(4.0), 1e-12);
  const auto stub = sensitivity_report(UnboundedStatModel{});
  EXPECT_FALSE(stub.l1.is_finite());
  EXPECT_FALSE(stub.exp_mech.is_finite());
}

}  // namespace
}  // namespace dpbayes
