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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "dpbayes/experiments.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path,
                  "JSON config file (defaults are used when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out, "Output directory root")
      ->capture_default_str();
  cmd->add_option("--seed", opts.seed, "Override the config seed");
  cmd->add_option("--threads", opts.threads,
                  "Worker threads for independent tasks")
      ->check(CLI::Range(1, 1024))
      ->capture_default_str();
}

std::string config_text(const CommonOpts& opts) {
  if (opts.config_path.empty()) return {};
  std::ifstream f(opts.config_path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot read config file: " + opts.config_path);
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

dpbayes::RunContext make_ctx(const CommonOpts& opts) {
  return {opts.out, opts.threads};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dpbayes: differentially private Bayesian inference experiments"};
  app.require_subcommand(1);

  CommonOpts beta_opts, are_opts, adv_opts, fit_opts, eval_opts, synth_opts;

  CLI::App* beta = app.add_subcommand(
      "beta-demo",
      "Overlay exact, OPS, and Laplace posterior densities for one Bernoulli "
      "dataset");
  add_common(beta, beta_opts);
  beta->callback([&] {
    auto cfg = dpbayes::parse_beta_demo_config(config_text(beta_opts));
    if (beta_opts.seed) cfg.seed = *beta_opts.seed;
    const auto res = dpbayes::run_beta_demo(cfg, make_ctx(beta_opts));
    std::cout << "beta-demo: temperature=" << res.temperature
              << " delta=" << res.delta
              << " epsilon_charged=" << res.epsilon_charged
              << " ledger_epsilon=" << res.ledger.total().epsilon << '\n'
              << "wrote " << beta_opts.out << "/beta-demo\n";
  });

  CLI::App* are = app.add_subcommand(
      "are", "Mean absolute error of private posterior estimates vs sample "
             "size");
  add_common(are, are_opts);
  are->callback([&] {
    auto cfg = dpbayes::parse_are_config(config_text(are_opts));
    if (are_opts.seed) cfg.seed = *are_opts.seed;
    const auto res = dpbayes::run_are(cfg, make_ctx(are_opts));
    std::cout << "are: " << res.rows.size() << " rows, per-dataset cost "
              << cfg.epsilon << " + " << res.epsilon_charged
              << ", ledger_epsilon=" << res.ledger.total().epsilon << '\n'
              << "wrote " << are_opts.out << "/are\n";
  });

  CLI::App* adv = app.add_subcommand(
      "adversarial",
      "Greedy worst-case dataset growth tracking the realized local privacy "
      "loss");
  add_common(adv, adv_opts);
  adv->callback([&] {
    auto cfg = dpbayes::parse_adversarial_config(config_text(adv_opts));
    if (adv_opts.seed) cfg.seed = *adv_opts.seed;
    const auto res = dpbayes::run_adversarial(cfg, make_ctx(adv_opts));
    std::cout << "adversarial: final local epsilon "
              << res.rows.back().local_epsilon << " of bound " << res.bound
              << " after " << res.rows.size() << " steps\n"
              << "wrote " << adv_opts.out << "/adversarial\n";
  });

  CLI::App* hmm = app.add_subcommand(
      "hmm", "Event-log hidden Markov model fitting and evaluation");
  hmm->require_subcommand(1);

  CLI::App* fit = hmm->add_subcommand(
      "fit", "Fit across (mode, epsilon, multiplier) grids on held-out "
             "splits");
  add_common(fit, fit_opts);
  fit->callback([&] {
    auto cfg = dpbayes::parse_hmm_fit_config(config_text(fit_opts));
    if (fit_opts.seed) cfg.seed = *fit_opts.seed;
    const auto res = dpbayes::run_hmm_fit(cfg, make_ctx(fit_opts));
    std::cout << "hmm fit: " << res.tasks.size() << " tasks\n";
    for (const auto& row : res.aggregate) {
      std::cout << "  " << row.mode;
      if (row.mode != "nonprivate") std::cout << " eps=" << row.epsilon;
      if (row.multiplier > 0.0) std::cout << " M=" << row.multiplier;
      std::cout << ": heldout loglik " << row.mean_heldout_loglik << " +/- "
                << row.std_err << '\n';
    }
    std::cout << "ledger_epsilon=" << res.ledger.total().epsilon << '\n'
              << "wrote " << fit_opts.out << "/hmm-fit\n";
  });

  CLI::App* eval = hmm->add_subcommand(
      "eval", "Evaluate a saved model on a fresh events CSV");
  add_common(eval, eval_opts);
  eval->callback([&] {
    auto cfg = dpbayes::parse_hmm_eval_config(config_text(eval_opts));
    if (eval_opts.seed) cfg.seed = *eval_opts.seed;
    const auto res = dpbayes::run_hmm_eval(cfg, make_ctx(eval_opts));
    std::cout << "hmm eval: " << res.key.mode << " task, loglik " << res.loglik
              << " over " << res.n_cells << " cells\n"
              << "wrote " << eval_opts.out << "/hmm-eval\n";
  });

  CLI::App* synth = app.add_subcommand(
      "synth", "Draw a synthetic event log from the generative model");
  add_common(synth, synth_opts);
  synth->callback([&] {
    auto cfg = dpbayes::parse_synth_config(config_text(synth_opts));
    if (synth_opts.seed) cfg.seed = *synth_opts.seed;
    const auto res = dpbayes::run_synth(cfg, make_ctx(synth_opts));
    std::cout << "synth: " << res.data.events.records.size() << " records, "
              << res.data.regions.size() << " regions\n"
              << "wrote " << synth_opts.out << "/synth\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
