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

#include <benchmark/benchmark.h>

#include "dpbayes/events.hpp"
#include "dpbayes/hmm.hpp"
#include "dpbayes/mechanisms.hpp"
#include "dpbayes/rng.hpp"
#include "dpbayes/samplers.hpp"

namespace {

void BM_LaplaceDraw(benchmark::State& state) {
  dpbayes::Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpbayes::laplace_draw(2.0, rng));
  }
}
BENCHMARK(BM_LaplaceDraw);

void BM_TruncatedBetaDraw(benchmark::State& state) {
  dpbayes::Rng rng(7);
  const double a = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dpbayes::truncated_beta_draw(a, a, 0.05, 0.95, rng));
  }
}
BENCHMARK(BM_TruncatedBetaDraw)->Arg(2)->Arg(100)->Arg(10000);

void BM_TruncatedDirichletDraw(benchmark::State& state) {
  dpbayes::Rng rng(7);
  const std::vector<double> alphas(static_cast<std::size_t>(state.range(0)),
                                   2.5);
  const double a0 = 0.5 / static_cast<double>(alphas.size() * 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dpbayes::truncated_dirichlet_draw(alphas, a0, rng));
  }
}
BENCHMARK(BM_TruncatedDirichletDraw)->Arg(3)->Arg(8);

void BM_OpsSampleBeta(benchmark::State& state) {
  dpbayes::Rng rng(7);
  const dpbayes::BetaBernoulliModel model{0.05};
  dpbayes::PosteriorParams post;
  post.eta_stats = {300.0, 700.0};
  post.eta_count = 1001.0;
  const auto spec = dpbayes::ops_temperature(model, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dpbayes::ops_sample(model, post, spec, rng));
  }
}
BENCHMARK(BM_OpsSampleBeta);

// A mid-sized synthetic grid shared by the HMM benchmarks: 5 regions, 24
// timesteps, three 4-ary features, 200 records per cell.
dpbayes::HmmDataset benchmark_dataset() {
  dpbayes::SynthConfig synth;
  synth.model.n_states = 2;
  synth.model.n_features = 3;
  synth.model.feature_dims = {4, 4, 4};
  synth.n_regions = 5;
  synth.n_timesteps = 24;
  synth.n_per_cell = 200;
  synth.self_transition = 0.8;
  synth.emission_peak = 0.7;
  dpbayes::Rng rng(7);
  return dpbayes::make_hmm_dataset(dpbayes::synth_generate(synth, rng).events);
}

void BM_HmmZConditional(benchmark::State& state) {
  const dpbayes::HmmDataset dataset = benchmark_dataset();
  dpbayes::HmmConfig config;
  config.n_states = 2;
  config.n_features = 3;
  config.feature_dims = {4, 4, 4};
  dpbayes::Rng rng(11);
  dpbayes::HmmState hmm_state;
  hmm_state.z.assign(5, std::vector<int>(25, 0));
  for (auto& chain : hmm_state.z) {
    for (std::size_t t = 1; t < chain.size(); ++t) {
      chain[t] = 1 + static_cast<int>(rng.uniform_index(2));
    }
  }
  hmm_state.theta = {
      {{0.7, 0.1, 0.1, 0.1}, {0.1, 0.7, 0.1, 0.1}, {0.1, 0.1, 0.7, 0.1}},
      {{0.1, 0.7, 0.1, 0.1}, {0.1, 0.1, 0.7, 0.1}, {0.1, 0.1, 0.1, 0.7}},
  };
  auto counts = dpbayes::count_transitions(hmm_state.z, 2);
  counts[static_cast<std::size_t>(hmm_state.z[0][11])]
        [hmm_state.z[0][12] - 1] -= 1.0;
  counts[static_cast<std::size_t>(hmm_state.z[0][12])]
        [hmm_state.z[0][13] - 1] -= 1.0;
  hmm_state.trans_counts = counts;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dpbayes::z_conditional(0, 12, hmm_state, dataset.data, config));
  }
}
BENCHMARK(BM_HmmZConditional);

void BM_HmmGibbsSweep(benchmark::State& state) {
  const dpbayes::HmmDataset dataset = benchmark_dataset();
  dpbayes::HmmConfig config;
  config.n_states = 2;
  config.n_features = 3;
  config.feature_dims = {4, 4, 4};
  std::uint64_t seed = 11;
  for (auto _ : state) {
    dpbayes::Rng rng(seed++);
    benchmark::DoNotOptimize(dpbayes::fit(config, dataset.data,
                                          dpbayes::FitMode::nonprivate(), 1, 0,
                                          rng));
  }
}
BENCHMARK(BM_HmmGibbsSweep);

}  // namespace

BENCHMARK_MAIN();
