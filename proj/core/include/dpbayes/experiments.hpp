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

// Reproducible experiment runners behind the command-line tool.  Every
// runner is deterministic given (config, seed): re-running writes
// byte-identical CSV/JSON artifacts, independent of the thread count,
// because each work unit draws from its own derived rng stream and outputs
// are emitted in task order.  Artifacts land under <out_dir>/<experiment>/:
// results.csv (plus experiment-specific extras), ledger.json, report.json.
// CSV files begin with a "# config_hash=<fnv1a64> seed=<seed>" comment line
// (except synth's results.csv, which stays loadable as an event log).

#ifndef DPBAYES_EXPERIMENTS_HPP_
#define DPBAYES_EXPERIMENTS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpbayes/accountant.hpp"
#include "dpbayes/events.hpp"
#include "dpbayes/hmm.hpp"

namespace dpbayes {

// Output directory and worker fan-out.  An empty out_dir computes results
// without touching the filesystem (used by tests).
struct RunContext {
  std::string out_dir;
  int threads = 1;
};

// FNV-1a 64-bit hash of the canonical (sorted-key) config JSON; stamped
// into every CSV header comment and report.json.
std::uint64_t fnv1a64(const std::string& text);

// --- beta-demo -------------------------------------------------------------
// One Bernoulli dataset; overlays the normalized densities of the exact
// truncated posterior, the OPS release (tempered truncated posterior), and
// n_privatized_curves Laplace-privatized untruncated posteriors.  Truncated
// curves are tabulated on an inclusive grid over [trunc, 1 - trunc];
// untruncated (Laplace) curves use a midpoint grid on (0, 1) because noisy
// statistics can push a shape below 1, making the density unbounded at the
// endpoints.

struct BetaDemoConfig {
  double epsilon = 1.0;
  double p_true = 0.3;
  double trunc = 0.2;
  int n_obs = 20;
  int n_privatized_curves = 30;
  int grid_points = 1000;
  std::uint64_t seed = 1;
};

struct DensityCurve {
  std::string name;
  std::vector<double> p;
  std::vector<double> density;
};

struct BetaDemoResult {
  DensityCurve true_posterior;
  DensityCurve ops;
  std::vector<DensityCurve> laplace;
  double temperature = 1.0;
  double delta = 0.0;            // exponential-mechanism sensitivity
  double epsilon_charged = 0.0;  // OPS charge min(epsilon, 2 * delta)
  int n_successes = 0;
  Ledger ledger;
};

BetaDemoConfig parse_beta_demo_config(const std::string& json_text);
BetaDemoResult run_beta_demo(const BetaDemoConfig& config,
                             const RunContext& ctx);

// --- are (accuracy of released estimates) ----------------------------------
// Mean absolute error of four point estimates of the Bernoulli parameter as
// the sample size grows: a non-private truncated posterior sample, a
// posterior sample from Laplace-privatized statistics, the posterior mean
// from the same privatized statistics (paired), and an OPS draw.  Rows are
// (method, n, mean_abs_error, std_err) sorted by method then n.  The ledger
// composes the Laplace and OPS releases sequentially within a dataset and
// in parallel across the independent repeats, one entry per (n, method).

struct AreConfig {
  double p_true = 0.1;
  double trunc = 0.05;
  double epsilon = 0.1;
  std::vector<std::int64_t> n_grid;  // empty: 16 log-spaced in [10, 10^4]
  int repeats = 1000;
  std::uint64_t seed = 1;
};

struct AreRow {
  std::string method;
  std::int64_t n = 0;
  double mean_abs_error = 0.0;
  double std_err = 0.0;
};

struct AreResult {
  std::vector<AreRow> rows;
  double epsilon_charged = 0.0;  // per-dataset OPS charge
  Ledger ledger;
};

AreConfig parse_are_config(const std::string& json_text);
AreResult run_are(const AreConfig& config, const RunContext& ctx);

// --- adversarial -------------------------------------------------------
// A worst-case adversary grows a Bernoulli dataset one record at a time,
// greedily choosing the outcome that maximizes the realized local privacy
// loss of the posterior release: eps_local(X) is the maximum over a
// grid_points grid of [trunc, 1 - trunc] of the absolute log-density ratio
// between the posteriors after appending a success versus a failure to X.
// Ties prefer success.  The loss sequence is nondecreasing and approaches
// the certified bound 2 * Delta.  No mechanism runs, so the ledger is empty.

struct AdversarialConfig {
  double trunc = 0.1;
  int grid_points = 2000;
  int steps = 500;
  std::uint64_t seed = 1;  // echoed for the reproducibility contract only
};

struct AdversarialRow {
  int step = 0;
  std::string chosen;  // "success" or "failure"
  double local_epsilon = 0.0;
  double bound = 0.0;  // 2 * Delta
};

struct AdversarialResult {
  std::vector<AdversarialRow> rows;
  double bound = 0.0;
  Ledger ledger;
};

AdversarialConfig parse_adversarial_config(const std::string& json_text);
AdversarialResult run_adversarial(const AdversarialConfig& config,
                                  const RunContext& ctx);

// --- hmm fit -----------------------------------------------------------
// Fits the event-log HMM across a grid of (mode, epsilon, multiplier) on
// n_splits random held-out splits and reports per-split and aggregated
// held-out log-likelihood.  Held-out cells are zeroed in the training
// tensor and evaluated against their true counts.  The data source is
// either an events CSV or an inline synthetic generator.  Extras written
// next to results.csv: aggregate.csv, assignments.csv, theta.csv, and
// model.json (consumed by hmm eval).  The master ledger concatenates every
// task's charges under task-namespaced parallel groups.

struct HmmDataSource {
  std::string events_path;            // empty: use `synth`
  std::optional<SynthConfig> synth;
  PreprocessRules preprocess;
};

struct HmmFitConfig {
  HmmDataSource source;
  int n_states = 2;
  double alpha = 1.0;
  double beta = 1.0;
  // Modes drawn from {"nonprivate", "laplace", "ops"}.  Laplace and ops run
  // once per epsilon; ops additionally once per truncation multiplier M
  // (theta truncated at 1 / (M * K_d)).  Nonprivate ignores both grids.
  std::vector<std::string> modes = {"nonprivate", "laplace"};
  std::vector<double> epsilons = {5.0};
  std::vector<double> ops_trunc_multipliers = {10.0, 100.0};
  int n_splits = 2;
  double heldout_fraction = 0.1;
  int n_iters = 50;
  int burn_in = 25;
  bool save_samples = true;  // retain posterior samples in model.json
  std::uint64_t seed = 1;
};

struct HmmTaskKey {
  std::string mode;
  double epsilon = 0.0;     // 0 for nonprivate
  double multiplier = 0.0;  // 0 unless ops
  int split = 0;
};

struct HmmTaskResult {
  HmmTaskKey key;
  double heldout_loglik = 0.0;
  int n_heldout_cells = 0;
  PrivacyCost cost;  // this task's own ledger total
};

struct HmmAggRow {
  std::string mode;
  double epsilon = 0.0;
  double multiplier = 0.0;
  double mean_heldout_loglik = 0.0;
  double std_err = 0.0;
  int n_splits = 0;
};

struct HmmFitRunResult {
  std::vector<HmmTaskResult> tasks;
  std::vector<HmmAggRow> aggregate;
  std::vector<std::string> regions;
  int first_timestep = 0;
  Ledger ledger;
};

HmmFitConfig parse_hmm_fit_config(const std::string& json_text);
HmmFitRunResult run_hmm_fit(const HmmFitConfig& config, const RunContext& ctx);

// --- hmm eval ----------------------------------------------------------
// Loads one fitted task from a model.json written by hmm fit and evaluates
// its predictive log-likelihood on a fresh events CSV, treating every cell
// of the new table as held out.  The evaluation grid (regions, months,
// feature dimensions) must match the fitted one.  Requires a model saved
// with save_samples = true.

struct HmmEvalConfig {
  std::string model_path;
  std::string events_path;
  PreprocessRules preprocess;
  int task_index = 0;
  std::uint64_t seed = 1;  // echoed only; evaluation is deterministic
};

struct HmmEvalResult {
  HmmTaskKey key;
  double loglik = 0.0;
  int n_cells = 0;
  Ledger ledger;  // empty: evaluation is post-processing
};

HmmEvalConfig parse_hmm_eval_config(const std::string& json_text);
HmmEvalResult run_hmm_eval(const HmmEvalConfig& config, const RunContext& ctx);

// --- synth -------------------------------------------------------------
// Draws a synthetic event log from the generative model and writes it as
// results.csv in the load_events_csv schema (no comment line, so the file
// is directly loadable), with ground-truth states in z_true.csv and the
// true parameters echoed in report.json.

struct SynthRunConfig {
  SynthConfig synth;
  std::uint64_t seed = 1;
};

struct SynthRunResult {
  SynthResult data;
  Ledger ledger;  // empty: generation is not a release
};

SynthRunConfig parse_synth_config(const std::string& json_text);
SynthRunResult run_synth(const SynthRunConfig& config, const RunContext& ctx);

}  // namespace dpbayes

#endif  // DPBAYES_EXPERIMENTS_HPP_
