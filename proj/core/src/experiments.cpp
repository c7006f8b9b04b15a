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

#include "dpbayes/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "dpbayes/expfam.hpp"
#include "dpbayes/mechanisms.hpp"
#include "dpbayes/special.hpp"

#include "json.hpp"

namespace dpbayes {

namespace {

using nlohmann::json;

// --- formatting ----------------------------------------------------------

// Shortest decimal form that round-trips: CSV cells are byte-stable across
// reruns and exact to re-parse.
std::string fmt_double(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string csv_prefix(std::uint64_t hash, std::uint64_t seed,
                       const std::string& header) {
  return "# config_hash=" + hash_hex(hash) + " seed=" + std::to_string(seed) +
         "\n" + header + "\n";
}

// --- filesystem ----------------------------------------------------------

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::filesystem::path experiment_dir(const RunContext& ctx,
                                     const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(ctx.out_dir) / name;
  std::filesystem::create_directories(dir);
  return dir;
}

void write_ledger_and_report(const std::filesystem::path& dir,
                             const Ledger& ledger, const json& report) {
  std::string lj = ledger.to_json_string();
  if (lj.empty() || lj.back() != '\n') lj += '\n';
  write_text(dir / "ledger.json", lj);
  write_text(dir / "report.json", report.dump(2) + "\n");
}

json base_report(const char* experiment, const json& config_echo,
                 std::uint64_t hash, std::uint64_t seed, const Ledger& ledger) {
  const PrivacyCost total = ledger.total();
  json r;
  r["experiment"] = experiment;
  r["config"] = config_echo;
  r["config_hash"] = hash_hex(hash);
  r["seed"] = seed;
  r["ledger_total"] = {{"epsilon", total.epsilon}, {"delta", total.delta}};
  return r;
}

// --- config parsing ------------------------------------------------------

json parse_object(const std::string& text, const char* what) {
  if (text.empty()) return json::object();
  json j = json::parse(text);  // throws with line/column context
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(what) +
                                ": config must be a JSON object");
  }
  return j;
}

void check_keys(const json& j, const char* what,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument(std::string(what) +
                                  ": unknown config key \"" + it.key() + "\"");
    }
  }
}

template <typename T>
T get_or(const json& j, const char* key, T def, const char* what) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string(what) + ": bad value for \"" +
                                key + "\": " + e.what());
  }
}

// Reads an optional knob: absent keeps `def`, null disables it, a number
// sets it.
void get_knob(const json& j, const char* key, std::optional<double>& slot,
              const char* what) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    slot.reset();
    return;
  }
  slot = get_or(j, key, 0.0, what);
}

// --- config echoes (canonical JSON: hashed and written to report.json) ----

json beta_demo_json(const BetaDemoConfig& c) {
  return json{{"epsilon", c.epsilon},
              {"p_true", c.p_true},
              {"trunc", c.trunc},
              {"n_obs", c.n_obs},
              {"n_privatized_curves", c.n_privatized_curves},
              {"grid_points", c.grid_points},
              {"seed", c.seed}};
}

json are_json(const AreConfig& c, const std::vector<std::int64_t>& grid) {
  return json{{"p_true", c.p_true},   {"trunc", c.trunc},
              {"epsilon", c.epsilon}, {"n_grid", grid},
              {"repeats", c.repeats}, {"seed", c.seed}};
}

json adversarial_json(const AdversarialConfig& c) {
  return json{{"trunc", c.trunc},
              {"grid_points", c.grid_points},
              {"steps", c.steps},
              {"seed", c.seed}};
}

json synth_block_json(const SynthConfig& c) {
  json j{{"n_states", c.model.n_states},
         {"feature_dims", c.model.feature_dims},
         {"alpha", c.model.alpha},
         {"beta", c.model.beta},
         {"n_regions", c.n_regions},
         {"n_timesteps", c.n_timesteps},
         {"n_per_cell", c.n_per_cell}};
  if (c.trans) j["trans"] = *c.trans;
  if (c.theta) j["theta"] = *c.theta;
  if (c.self_transition) j["self_transition"] = *c.self_transition;
  if (c.emission_peak) j["emission_peak"] = *c.emission_peak;
  return j;
}

json preprocess_json(const PreprocessRules& r) {
  json merges = json::object();
  for (const auto& [name, sources] : r.merge_disjunctive) {
    merges[name] = sources;
  }
  return json{{"binarize", r.binarize},
              {"merge_disjunctive", merges},
              {"drop_empty_timesteps", r.drop_empty_timesteps},
              {"min_region_records", r.min_region_records}};
}

json hmm_fit_json(const HmmFitConfig& c) {
  json j{{"events_path", c.source.events_path},
         {"preprocess", preprocess_json(c.source.preprocess)},
         {"n_states", c.n_states},
         {"alpha", c.alpha},
         {"beta", c.beta},
         {"modes", c.modes},
         {"epsilons", c.epsilons},
         {"ops_trunc_multipliers", c.ops_trunc_multipliers},
         {"n_splits", c.n_splits},
         {"heldout_fraction", c.heldout_fraction},
         {"n_iters", c.n_iters},
         {"burn_in", c.burn_in},
         {"save_samples", c.save_samples},
         {"seed", c.seed}};
  if (c.source.synth) j["synth"] = synth_block_json(*c.source.synth);
  return j;
}

json hmm_eval_json(const HmmEvalConfig& c) {
  return json{{"model_path", c.model_path},
              {"events_path", c.events_path},
              {"preprocess", preprocess_json(c.preprocess)},
              {"task_index", c.task_index},
              {"seed", c.seed}};
}

json synth_run_json(const SynthRunConfig& c) {
  return json{{"synth", synth_block_json(c.synth)}, {"seed", c.seed}};
}

SynthConfig parse_synth_block(const json& j) {
  check_keys(j, "synth",
             {"n_states", "feature_dims", "alpha", "beta", "n_regions",
              "n_timesteps", "n_per_cell", "trans", "theta", "self_transition",
              "emission_peak"});
  SynthConfig c;
  c.model.n_states = get_or(j, "n_states", 2, "synth");
  c.model.feature_dims =
      get_or(j, "feature_dims", std::vector<int>{4, 4, 4}, "synth");
  c.model.n_features = static_cast<int>(c.model.feature_dims.size());
  c.model.alpha = get_or(j, "alpha", 1.0, "synth");
  c.model.beta = get_or(j, "beta", 1.0, "synth");
  c.n_regions = get_or(j, "n_regions", 5, "synth");
  c.n_timesteps = get_or(j, "n_timesteps", 24, "synth");
  c.n_per_cell = get_or(j, "n_per_cell", 200, "synth");
  if (j.contains("trans")) {
    c.trans = get_or(j, "trans", std::vector<std::vector<double>>{}, "synth");
  }
  if (j.contains("theta")) {
    c.theta = get_or(j, "theta",
                     std::vector<std::vector<std::vector<double>>>{}, "synth");
  }
  // Well-separated defaults so the out-of-the-box demo is learnable; pass
  // null to draw from the prior instead.
  c.self_transition = 0.8;
  c.emission_peak = 0.7;
  get_knob(j, "self_transition", c.self_transition, "synth");
  get_knob(j, "emission_peak", c.emission_peak, "synth");
  if (c.trans) c.self_transition.reset();
  if (c.theta) c.emission_peak.reset();
  return c;
}

PreprocessRules parse_preprocess(const json& j) {
  check_keys(j, "preprocess",
             {"binarize", "merge_disjunctive", "drop_empty_timesteps",
              "min_region_records"});
  PreprocessRules r;
  r.binarize = get_or(j, "binarize", std::vector<std::string>{}, "preprocess");
  if (j.contains("merge_disjunctive")) {
    const json& m = j.at("merge_disjunctive");
    if (!m.is_object()) {
      throw std::invalid_argument(
          "preprocess: merge_disjunctive must map new column names to source "
          "column lists");
    }
    for (auto it = m.begin(); it != m.end(); ++it) {
      r.merge_disjunctive.emplace_back(
          it.key(), it.value().get<std::vector<std::string>>());
    }
  }
  r.drop_empty_timesteps =
      get_or(j, "drop_empty_timesteps", false, "preprocess");
  r.min_region_records = get_or(j, "min_region_records", 0, "preprocess");
  return r;
}

// --- numeric helpers -------------------------------------------------------

std::vector<double> inclusive_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return g;
}

std::vector<double> midpoint_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) {
    g[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / n;
  }
  return g;
}

struct MeanStderr {
  double mean = 0.0;
  double std_err = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.std_err = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

// --- deterministic fan-out -------------------------------------------------

// Runs fn(0..n-1) on up to `threads` workers.  Units must not share mutable
// state; determinism comes from per-unit rng streams and from consuming
// results in index order afterwards.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

void require(bool ok, const char* what, const char* message) {
  if (!ok) throw std::invalid_argument(std::string(what) + ": " + message);
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// --- beta-demo -------------------------------------------------------------

BetaDemoConfig parse_beta_demo_config(const std::string& json_text) {
  const json j = parse_object(json_text, "beta-demo");
  check_keys(j, "beta-demo",
             {"epsilon", "p_true", "trunc", "n_obs", "n_privatized_curves",
              "grid_points", "seed"});
  BetaDemoConfig c;
  c.epsilon = get_or(j, "epsilon", c.epsilon, "beta-demo");
  c.p_true = get_or(j, "p_true", c.p_true, "beta-demo");
  c.trunc = get_or(j, "trunc", c.trunc, "beta-demo");
  c.n_obs = get_or(j, "n_obs", c.n_obs, "beta-demo");
  c.n_privatized_curves =
      get_or(j, "n_privatized_curves", c.n_privatized_curves, "beta-demo");
  c.grid_points = get_or(j, "grid_points", c.grid_points, "beta-demo");
  c.seed = get_or(j, "seed", c.seed, "beta-demo");
  return c;
}

BetaDemoResult run_beta_demo(const BetaDemoConfig& cfg, const RunContext& ctx) {
  require(cfg.epsilon > 0.0, "beta-demo", "epsilon must be > 0");
  require(cfg.p_true > 0.0 && cfg.p_true < 1.0, "beta-demo",
          "p_true must lie in (0, 1)");
  require(cfg.trunc > 0.0 && cfg.trunc < 0.5, "beta-demo",
          "trunc must lie in (0, 0.5)");
  require(cfg.n_obs >= 1, "beta-demo", "n_obs must be >= 1");
  require(cfg.n_privatized_curves >= 0, "beta-demo",
          "n_privatized_curves must be >= 0");
  require(cfg.grid_points >= 2, "beta-demo", "grid_points must be >= 2");

  const json echo = beta_demo_json(cfg);
  const std::uint64_t hash = fnv1a64(echo.dump());

  const BetaBernoulliModel trunc_model{cfg.trunc};
  const BetaBernoulliModel open_model{0.0};
  // Flat Beta(1, 1): zero pseudo-statistics (alpha * chi = shapes - 1).
  const ConjugatePrior flat{{0.0, 0.0}, 1.0};

  const Rng root(cfg.seed);
  Rng data_rng = root.stream(0);
  double successes = 0.0;
  for (int i = 0; i < cfg.n_obs; ++i) {
    if (data_rng.uniform() < cfg.p_true) successes += 1.0;
  }
  const SuffStats stats{{successes, static_cast<double>(cfg.n_obs) - successes},
                        static_cast<double>(cfg.n_obs),
                        false};
  const PosteriorParams post = update_posterior(flat, stats);

  BetaDemoResult res;
  res.n_successes = static_cast<int>(successes);
  const TemperedSampleSpec spec = ops_temperature(trunc_model, cfg.epsilon);
  res.temperature = spec.temperature;
  res.delta = exp_mech_sensitivity(trunc_model).value();
  res.epsilon_charged = spec.epsilon_charged;

  const std::vector<double> trunc_grid =
      inclusive_grid(cfg.trunc, 1.0 - cfg.trunc, cfg.grid_points);
  res.true_posterior.name = "true_posterior";
  res.true_posterior.p = trunc_grid;
  for (double p : trunc_grid) {
    res.true_posterior.density.push_back(
        std::exp(posterior_log_pdf(trunc_model, post, p)));
  }

  res.ops.name = "ops";
  res.ops.p = trunc_grid;
  const PosteriorParams tempered = tempered_posterior(post, spec.temperature);
  for (double p : trunc_grid) {
    res.ops.density.push_back(
        std::exp(posterior_log_pdf(trunc_model, tempered, p)));
  }
  res.ledger.charge("ops release (tempered posterior density)",
                    {spec.epsilon_charged, 0.0});

  // Untruncated curves live on the open interval, so use a midpoint grid; a
  // noisy success count below -1 drags a shape parameter to zero or below,
  // making the endpoint density unbounded.  Evaluate the density of what the
  // sampling boundary would actually draw: shapes floored at 1e-6.
  const std::vector<double> open_grid = midpoint_grid(0.0, 1.0, cfg.grid_points);
  const int name_width = std::max(
      2, static_cast<int>(std::to_string(cfg.n_privatized_curves).size()));
  for (int i = 0; i < cfg.n_privatized_curves; ++i) {
    Rng curve_rng = root.stream(1 + i);
    const SuffStats priv =
        privatize_stats(open_model, stats, cfg.epsilon, curve_rng);
    const PosteriorParams ppriv = update_posterior(flat, priv);
    const std::vector<double> sh = shape_parameters(ppriv);
    const double lb = log_beta(sh[0], sh[1]);
    DensityCurve curve;
    std::ostringstream name;
    name << "laplace_" << std::setw(name_width) << std::setfill('0') << (i + 1);
    curve.name = name.str();
    curve.p = open_grid;
    for (double p : open_grid) {
      curve.density.push_back(std::exp((sh[0] - 1.0) * std::log(p) +
                                       (sh[1] - 1.0) * std::log1p(-p) - lb));
    }
    res.laplace.push_back(std::move(curve));
    res.ledger.charge("laplace release, curve " + std::to_string(i + 1),
                      {cfg.epsilon, 0.0});
  }

  if (!ctx.out_dir.empty()) {
    std::ostringstream csv;
    csv << csv_prefix(hash, cfg.seed, "curve,p,density");
    auto emit = [&csv](const DensityCurve& c) {
      for (std::size_t i = 0; i < c.p.size(); ++i) {
        csv << c.name << ',' << fmt_double(c.p[i]) << ','
            << fmt_double(c.density[i]) << '\n';
      }
    };
    emit(res.true_posterior);
    emit(res.ops);
    for (const DensityCurve& c : res.laplace) emit(c);

    json report = base_report("beta-demo", echo, hash, cfg.seed, res.ledger);
    report["n_successes"] = res.n_successes;
    report["temperature"] = res.temperature;
    report["delta"] = res.delta;
    report["epsilon_charged"] = res.epsilon_charged;
    report["epsilon_unused"] = spec.epsilon_unused;

    const auto dir = experiment_dir(ctx, "beta-demo");
    write_text(dir / "results.csv", csv.str());
    write_ledger_and_report(dir, res.ledger, report);
  }
  return res;
}

// --- are ---------------------------------------------------------------

namespace {

std::vector<std::int64_t> resolve_are_grid(const AreConfig& c) {
  if (!c.n_grid.empty()) {
    for (std::int64_t n : c.n_grid) {
      require(n >= 1, "are", "every n_grid entry must be >= 1");
    }
    return c.n_grid;
  }
  std::vector<std::int64_t> g;
  for (int i = 0; i < 16; ++i) {
    const auto n = static_cast<std::int64_t>(
        std::llround(std::pow(10.0, 1.0 + 3.0 * i / 15.0)));
    if (g.empty() || g.back() != n) g.push_back(n);
  }
  return g;
}

}  // namespace

AreConfig parse_are_config(const std::string& json_text) {
  const json j = parse_object(json_text, "are");
  check_keys(j, "are",
             {"p_true", "trunc", "epsilon", "n_grid", "repeats", "seed"});
  AreConfig c;
  c.p_true = get_or(j, "p_true", c.p_true, "are");
  c.trunc = get_or(j, "trunc", c.trunc, "are");
  c.epsilon = get_or(j, "epsilon", c.epsilon, "are");
  c.n_grid = get_or(j, "n_grid", c.n_grid, "are");
  c.repeats = get_or(j, "repeats", c.repeats, "are");
  c.seed = get_or(j, "seed", c.seed, "are");
  return c;
}

AreResult run_are(const AreConfig& cfg, const RunContext& ctx) {
  require(cfg.p_true > 0.0 && cfg.p_true < 1.0, "are",
          "p_true must lie in (0, 1)");
  require(cfg.trunc > 0.0 && cfg.trunc < 0.5, "are",
          "trunc must lie in (0, 0.5)");
  require(cfg.epsilon > 0.0, "are", "epsilon must be > 0");
  require(cfg.repeats >= 2, "are", "repeats must be >= 2");
  const std::vector<std::int64_t> grid = resolve_are_grid(cfg);

  const json echo = are_json(cfg, grid);
  const std::uint64_t hash = fnv1a64(echo.dump());

  const BetaBernoulliModel trunc_model{cfg.trunc};
  const BetaBernoulliModel open_model{0.0};
  // Flat Beta(1, 1): zero pseudo-statistics (alpha * chi = shapes - 1).
  const ConjugatePrior flat{{0.0, 0.0}, 1.0};
  const TemperedSampleSpec spec = ops_temperature(trunc_model, cfg.epsilon);

  static constexpr std::array<const char*, 4> kMethods = {
      "nonprivate", "laplace", "laplace_mean", "ops"};
  const int n_n = static_cast<int>(grid.size());
  const int repeats = cfg.repeats;
  std::vector<std::array<double, 4>> err(
      static_cast<std::size_t>(n_n) * repeats);

  parallel_for(n_n * repeats, ctx.threads, [&](int idx) {
    const int i = idx / repeats;
    const int j = idx % repeats;
    const Rng unit = Rng(cfg.seed).stream(i).stream(j);
    Rng data_rng = unit.stream(0);
    Rng nonpriv_rng = unit.stream(1);
    Rng lap_rng = unit.stream(2);
    Rng ops_rng = unit.stream(3);

    const std::int64_t n = grid[i];
    double s = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      if (data_rng.uniform() < cfg.p_true) s += 1.0;
    }
    const SuffStats stats{{s, static_cast<double>(n) - s},
                          static_cast<double>(n),
                          false};
    const PosteriorParams post = update_posterior(flat, stats);
    auto& e = err[idx];
    e[0] = std::abs(sample_posterior(trunc_model, post, nonpriv_rng) -
                    cfg.p_true);
    const SuffStats priv =
        privatize_stats(open_model, stats, cfg.epsilon, lap_rng);
    const PosteriorParams ppriv = update_posterior(flat, priv);
    e[1] =
        std::abs(sample_posterior(open_model, ppriv, lap_rng) - cfg.p_true);
    // Mean of the same noisy-statistics posterior (paired with the sample
    // above), with the sampling boundary's shape floor.
    const std::vector<double> sh = shape_parameters(ppriv);
    e[2] = std::abs(sh[0] / (sh[0] + sh[1]) - cfg.p_true);
    e[3] = std::abs(ops_sample(trunc_model, post, spec, ops_rng) - cfg.p_true);
  });

  AreResult res;
  res.epsilon_charged = spec.epsilon_charged;
  for (int m = 0; m < 4; ++m) {
    for (int i = 0; i < n_n; ++i) {
      std::vector<double> xs(repeats);
      for (int j = 0; j < repeats; ++j) {
        xs[j] = err[static_cast<std::size_t>(i) * repeats + j][m];
      }
      const MeanStderr ms = mean_stderr(xs);
      res.rows.push_back({kMethods[m], grid[i], ms.mean, ms.std_err});
    }
  }
  std::sort(res.rows.begin(), res.rows.end(),
            [](const AreRow& a, const AreRow& b) {
              return std::tie(a.method, a.n) < std::tie(b.method, b.n);
            });

  // One dataset sees a Laplace release and an OPS release (sequential); the
  // repeats are disjoint datasets (parallel within each group).
  for (int i = 0; i < n_n; ++i) {
    const std::string suffix = ", n=" + std::to_string(grid[i]) + " (" +
                               std::to_string(repeats) +
                               " disjoint repeats)";
    res.ledger.charge_parallel("laplace release" + suffix, "are-laplace",
                               {cfg.epsilon, 0.0});
    res.ledger.charge_parallel("ops release" + suffix, "are-ops",
                               {spec.epsilon_charged, 0.0});
  }

  if (!ctx.out_dir.empty()) {
    std::ostringstream csv;
    csv << csv_prefix(hash, cfg.seed, "method,n,mean_abs_error,std_err");
    for (const AreRow& r : res.rows) {
      csv << r.method << ',' << r.n << ',' << fmt_double(r.mean_abs_error)
          << ',' << fmt_double(r.std_err) << '\n';
    }
    json report = base_report("are", echo, hash, cfg.seed, res.ledger);
    report["epsilon_charged"] = res.epsilon_charged;
    report["methods"] = kMethods;

    const auto dir = experiment_dir(ctx, "are");
    write_text(dir / "results.csv", csv.str());
    write_ledger_and_report(dir, res.ledger, report);
  }
  return res;
}

// --- adversarial -------------------------------------------------------

AdversarialConfig parse_adversarial_config(const std::string& json_text) {
  const json j = parse_object(json_text, "adversarial");
  check_keys(j, "adversarial", {"trunc", "grid_points", "steps", "seed"});
  AdversarialConfig c;
  c.trunc = get_or(j, "trunc", c.trunc, "adversarial");
  c.grid_points = get_or(j, "grid_points", c.grid_points, "adversarial");
  c.steps = get_or(j, "steps", c.steps, "adversarial");
  c.seed = get_or(j, "seed", c.seed, "adversarial");
  return c;
}

AdversarialResult run_adversarial(const AdversarialConfig& cfg,
                                  const RunContext& ctx) {
  require(cfg.trunc > 0.0 && cfg.trunc < 0.5, "adversarial",
          "trunc must lie in (0, 0.5)");
  require(cfg.grid_points >= 2, "adversarial", "grid_points must be >= 2");
  require(cfg.steps >= 1, "adversarial", "steps must be >= 1");

  const json echo = adversarial_json(cfg);
  const std::uint64_t hash = fnv1a64(echo.dump());

  const BetaBernoulliModel model{cfg.trunc};
  AdversarialResult res;
  res.bound = 2.0 * exp_mech_sensitivity(model).value();

  const std::vector<double> grid =
      inclusive_grid(cfg.trunc, 1.0 - cfg.trunc, cfg.grid_points);
  std::vector<double> logits(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    logits[g] = std::log(grid[g]) - std::log1p(-grid[g]);
  }

  // Local loss of the posterior release after dataset (ns, nf): the largest
  // absolute log-density ratio, over the grid, between the posteriors that
  // would follow one more success versus one more failure.  The ratio is
  // logit(p) plus a constant, so one density evaluation per branch fixes the
  // constant and the grid scan is arithmetic.
  auto local_eps = [&](int ns, int nf) {
    const double n1 = static_cast<double>(ns + nf + 1);
    const PosteriorParams after_s{
        {static_cast<double>(ns) + 1.0, static_cast<double>(nf)}, n1, false};
    const PosteriorParams after_f{
        {static_cast<double>(ns), static_cast<double>(nf) + 1.0}, n1, false};
    const double mid = 0.5;
    const double c = posterior_log_pdf(model, after_s, mid) -
                     posterior_log_pdf(model, after_f, mid) -
                     (std::log(mid) - std::log1p(-mid));
    if (!std::isfinite(c)) {
      throw std::runtime_error(
          "adversarial: posterior normalizer underflowed; reduce steps");
    }
    double best = 0.0;
    for (double l : logits) best = std::max(best, std::abs(l + c));
    return best;
  };

  int n_succ = 0;
  int n_fail = 0;
  for (int step = 1; step <= cfg.steps; ++step) {
    const double eps_succ = local_eps(n_succ + 1, n_fail);
    const double eps_fail = local_eps(n_succ, n_fail + 1);
    const bool pick_succ = eps_succ >= eps_fail;
    if (pick_succ) {
      ++n_succ;
    } else {
      ++n_fail;
    }
    res.rows.push_back({step, pick_succ ? "success" : "failure",
                        pick_succ ? eps_succ : eps_fail, res.bound});
  }

  if (!ctx.out_dir.empty()) {
    std::ostringstream csv;
    csv << csv_prefix(hash, cfg.seed, "step,chosen,local_epsilon,bound");
    for (const AdversarialRow& r : res.rows) {
      csv << r.step << ',' << r.chosen << ',' << fmt_double(r.local_epsilon)
          << ',' << fmt_double(r.bound) << '\n';
    }
    json report = base_report("adversarial", echo, hash, cfg.seed, res.ledger);
    report["bound"] = res.bound;
    report["final_local_epsilon"] = res.rows.back().local_epsilon;
    report["n_success"] = n_succ;
    report["n_failure"] = n_fail;
    report["note"] =
        "losses are computed analytically; no mechanism ran, so the ledger "
        "is empty";

    const auto dir = experiment_dir(ctx, "adversarial");
    write_text(dir / "results.csv", csv.str());
    write_ledger_and_report(dir, res.ledger, report);
  }
  return res;
}

// --- hmm fit -----------------------------------------------------------

HmmFitConfig parse_hmm_fit_config(const std::string& json_text) {
  const json j = parse_object(json_text, "hmm fit");
  check_keys(j, "hmm fit",
             {"events_path", "synth", "preprocess", "n_states", "alpha",
              "beta", "modes", "epsilons", "ops_trunc_multipliers", "n_splits",
              "heldout_fraction", "n_iters", "burn_in", "save_samples",
              "seed"});
  HmmFitConfig c;
  c.source.events_path =
      get_or(j, "events_path", c.source.events_path, "hmm fit");
  if (j.contains("synth")) {
    c.source.synth = parse_synth_block(j.at("synth"));
  } else if (c.source.events_path.empty()) {
    c.source.synth = parse_synth_block(json::object());  // runnable default
  }
  if (j.contains("preprocess")) {
    c.source.preprocess = parse_preprocess(j.at("preprocess"));
  }
  c.n_states = get_or(j, "n_states", c.n_states, "hmm fit");
  c.alpha = get_or(j, "alpha", c.alpha, "hmm fit");
  c.beta = get_or(j, "beta", c.beta, "hmm fit");
  c.modes = get_or(j, "modes", c.modes, "hmm fit");
  c.epsilons = get_or(j, "epsilons", c.epsilons, "hmm fit");
  c.ops_trunc_multipliers =
      get_or(j, "ops_trunc_multipliers", c.ops_trunc_multipliers, "hmm fit");
  c.n_splits = get_or(j, "n_splits", c.n_splits, "hmm fit");
  c.heldout_fraction =
      get_or(j, "heldout_fraction", c.heldout_fraction, "hmm fit");
  c.n_iters = get_or(j, "n_iters", c.n_iters, "hmm fit");
  c.burn_in = get_or(j, "burn_in", c.burn_in, "hmm fit");
  c.save_samples = get_or(j, "save_samples", c.save_samples, "hmm fit");
  c.seed = get_or(j, "seed", c.seed, "hmm fit");
  return c;
}

namespace {

struct HmmTaskSpec {
  HmmTaskKey key;
  FitMode fmode;
  std::optional<double> multiplier;
  std::string tag;
};

std::vector<HmmTaskSpec> build_hmm_tasks(const HmmFitConfig& cfg) {
  std::vector<HmmTaskSpec> specs;
  for (const std::string& mode : cfg.modes) {
    if (mode == "nonprivate") {
      for (int s = 0; s < cfg.n_splits; ++s) {
        specs.push_back({{mode, 0.0, 0.0, s},
                         FitMode::nonprivate(),
                         std::nullopt,
                         "nonprivate-s" + std::to_string(s)});
      }
    } else if (mode == "laplace") {
      for (double eps : cfg.epsilons) {
        for (int s = 0; s < cfg.n_splits; ++s) {
          specs.push_back({{mode, eps, 0.0, s},
                           FitMode::laplace(eps),
                           std::nullopt,
                           "laplace-eps" + fmt_double(eps) + "-s" +
                               std::to_string(s)});
        }
      }
    } else if (mode == "ops") {
      for (double eps : cfg.epsilons) {
        for (double mult : cfg.ops_trunc_multipliers) {
          for (int s = 0; s < cfg.n_splits; ++s) {
            specs.push_back({{mode, eps, mult, s},
                             FitMode::ops(eps),
                             mult,
                             "ops-eps" + fmt_double(eps) + "-M" +
                                 fmt_double(mult) + "-s" + std::to_string(s)});
          }
        }
      }
    } else {
      throw std::invalid_argument(
          "hmm fit: unknown mode \"" + mode +
          "\" (expected nonprivate, laplace, or ops)");
    }
  }
  return specs;
}

}  // namespace

HmmFitRunResult run_hmm_fit(const HmmFitConfig& cfg, const RunContext& ctx) {
  require(cfg.n_states >= 1, "hmm fit", "n_states must be >= 1");
  require(cfg.alpha > 0.0, "hmm fit", "alpha must be > 0");
  require(cfg.beta > 0.0, "hmm fit", "beta must be > 0");
  require(!cfg.modes.empty(), "hmm fit", "modes must be nonempty");
  require(cfg.n_splits >= 1, "hmm fit", "n_splits must be >= 1");
  require(cfg.heldout_fraction > 0.0 && cfg.heldout_fraction < 1.0, "hmm fit",
          "heldout_fraction must lie in (0, 1)");
  require(cfg.burn_in >= 0 && cfg.n_iters > cfg.burn_in, "hmm fit",
          "need n_iters > burn_in >= 0");
  const bool any_private =
      std::any_of(cfg.modes.begin(), cfg.modes.end(), [](const std::string& m) {
        return m == "laplace" || m == "ops";
      });
  const bool any_ops = std::any_of(
      cfg.modes.begin(), cfg.modes.end(),
      [](const std::string& m) { return m == "ops"; });
  if (any_private) {
    require(!cfg.epsilons.empty(), "hmm fit",
            "private modes need a nonempty epsilons grid");
    for (double e : cfg.epsilons) {
      require(e > 0.0, "hmm fit", "every epsilon must be > 0");
    }
  }
  if (any_ops) {
    require(!cfg.ops_trunc_multipliers.empty(), "hmm fit",
            "ops mode needs a nonempty ops_trunc_multipliers grid");
    for (double m : cfg.ops_trunc_multipliers) {
      require(m > 1.0, "hmm fit", "every ops truncation multiplier must be > 1");
    }
  }
  require(!cfg.source.events_path.empty() || cfg.source.synth.has_value(),
          "hmm fit", "data source needs events_path or synth");

  const json echo = hmm_fit_json(cfg);
  const std::uint64_t hash = fnv1a64(echo.dump());
  const Rng root(cfg.seed);

  // Data.
  EventTable table;
  bool synthetic = false;
  if (!cfg.source.events_path.empty()) {
    table = load_events_csv(cfg.source.events_path);
  } else {
    cfg.source.synth->validate();
    Rng synth_rng = root.stream(9000);
    table = synth_generate(*cfg.source.synth, synth_rng).events;
    synthetic = true;
  }
  table = preprocess(table, cfg.source.preprocess);
  if (table.records.empty()) {
    throw std::runtime_error("hmm fit: no records left after preprocessing");
  }
  const HmmDataset ds = make_hmm_dataset(table);

  HmmConfig base;
  base.n_states = cfg.n_states;
  base.n_features = table.n_features();
  base.feature_dims = table.feature_dims;
  base.alpha = cfg.alpha;
  base.beta = cfg.beta;
  base.validate();

  const int n_regions = ds.data.n_regions();
  const int n_timesteps = ds.data.n_timesteps();
  const int n_cells = n_regions * n_timesteps;
  require(n_cells >= 2, "hmm fit", "need at least two (region, month) cells");
  const int n_hold = std::clamp(
      static_cast<int>(std::floor(cfg.heldout_fraction * n_cells)), 1,
      n_cells - 1);

  // Held-out splits, shared by every task at the same split index so the
  // modes are compared on identical data.
  std::vector<std::vector<CellRef>> heldout(cfg.n_splits);
  std::vector<HmmData> trains(cfg.n_splits);
  for (int s = 0; s < cfg.n_splits; ++s) {
    Rng split_rng = root.stream(100 + s);
    std::vector<int> idx(n_cells);
    std::iota(idx.begin(), idx.end(), 0);
    split_rng.shuffle(idx.begin(), idx.end());
    idx.resize(n_hold);
    std::sort(idx.begin(), idx.end());
    trains[s] = ds.data;
    for (int i : idx) {
      const int r = i / n_timesteps;
      const int t = i % n_timesteps + 1;
      heldout[s].push_back({r, t});
      for (int d = 0; d < base.n_features; ++d) {
        trains[s].counts[r][t - 1][d].assign(base.feature_dims[d], 0.0);
      }
      trains[s].n_entries[r][t - 1] = 0.0;
    }
  }

  const std::vector<HmmTaskSpec> specs = build_hmm_tasks(cfg);
  std::vector<FitResult> fits(specs.size());
  std::vector<double> hll(specs.size());
  parallel_for(static_cast<int>(specs.size()), ctx.threads, [&](int i) {
    const HmmTaskSpec& sp = specs[i];
    HmmConfig task_config = base;
    if (sp.multiplier) task_config.ops_trunc_multiplier = sp.multiplier;
    Rng task_rng = Rng(cfg.seed).stream(20000 + static_cast<std::uint64_t>(i));
    fits[i] = fit(task_config, trains[sp.key.split], sp.fmode, cfg.n_iters,
                  cfg.burn_in, task_rng);
    hll[i] =
        heldout_loglik(fits[i], ds.data, heldout[sp.key.split], task_config);
  });

  HmmFitRunResult out;
  out.regions = ds.regions;
  out.first_timestep = ds.first_timestep;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    out.tasks.push_back(
        {specs[i].key, hll[i], n_hold, fits[i].ledger.total()});
  }

  // Aggregate over splits, in first-appearance order of (mode, eps, mult).
  std::map<std::tuple<std::string, double, double>, std::size_t> agg_index;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto key3 = std::make_tuple(specs[i].key.mode, specs[i].key.epsilon,
                                      specs[i].key.multiplier);
    if (agg_index.count(key3)) continue;
    agg_index[key3] = out.aggregate.size();
    std::vector<double> xs;
    for (std::size_t k = 0; k < specs.size(); ++k) {
      if (std::make_tuple(specs[k].key.mode, specs[k].key.epsilon,
                          specs[k].key.multiplier) == key3) {
        xs.push_back(hll[k]);
      }
    }
    const MeanStderr ms = mean_stderr(xs);
    out.aggregate.push_back({specs[i].key.mode, specs[i].key.epsilon,
                             specs[i].key.multiplier, ms.mean, ms.std_err,
                             static_cast<int>(xs.size())});
  }

  // Master ledger: every task's charges, groups namespaced per task.
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::string& tag = specs[i].tag;
    for (const LedgerEntry& e : fits[i].ledger.entries()) {
      if (e.parallel_group) {
        out.ledger.charge_parallel(tag + ": " + e.label,
                                   tag + "/" + *e.parallel_group, e.cost,
                                   e.delta_estimated);
      } else {
        out.ledger.charge(tag + ": " + e.label, e.cost, e.delta_estimated);
      }
    }
  }

  if (!ctx.out_dir.empty()) {
    std::ostringstream csv;
    csv << csv_prefix(
        hash, cfg.seed,
        "mode,epsilon,multiplier,split,n_heldout_cells,heldout_loglik");
    for (const HmmTaskResult& t : out.tasks) {
      csv << t.key.mode << ',' << fmt_double(t.key.epsilon) << ','
          << fmt_double(t.key.multiplier) << ',' << t.key.split << ','
          << t.n_heldout_cells << ',' << fmt_double(t.heldout_loglik) << '\n';
    }

    std::ostringstream agg;
    agg << csv_prefix(
        hash, cfg.seed,
        "mode,epsilon,multiplier,mean_heldout_loglik,std_err,n_splits");
    for (const HmmAggRow& r : out.aggregate) {
      agg << r.mode << ',' << fmt_double(r.epsilon) << ','
          << fmt_double(r.multiplier) << ',' << fmt_double(r.mean_heldout_loglik)
          << ',' << fmt_double(r.std_err) << ',' << r.n_splits << '\n';
    }

    std::ostringstream assign;
    assign << csv_prefix(hash, cfg.seed,
                         "mode,epsilon,multiplier,split,region,timestep,state");
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const HmmTaskKey& k = specs[i].key;
      const auto& z = fits[i].most_frequent_z;
      for (int r = 0; r < n_regions; ++r) {
        for (int t = 1; t <= n_timesteps; ++t) {
          assign << k.mode << ',' << fmt_double(k.epsilon) << ','
                 << fmt_double(k.multiplier) << ',' << k.split << ','
                 << ds.regions[r] << ',' << (ds.first_timestep + t - 1) << ','
                 << z[r][t] << '\n';
        }
      }
    }

    std::ostringstream theta;
    theta << csv_prefix(
        hash, cfg.seed,
        "mode,epsilon,multiplier,split,state,feature,outcome,probability");
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const HmmTaskKey& k = specs[i].key;
      const auto& est = fits[i].theta_estimate;
      for (int state = 1; state <= cfg.n_states; ++state) {
        for (int d = 0; d < base.n_features; ++d) {
          for (int j = 0; j < base.feature_dims[d]; ++j) {
            theta << k.mode << ',' << fmt_double(k.epsilon) << ','
                  << fmt_double(k.multiplier) << ',' << k.split << ',' << state
                  << ',' << table.feature_names[d] << ','
                  << table.feature_vocab[d][j] << ','
                  << fmt_double(est[state - 1][d][j]) << '\n';
          }
        }
      }
    }

    json model;
    model["schema"] = "dpbayes-hmm-model/1";
    model["n_states"] = cfg.n_states;
    model["feature_names"] = table.feature_names;
    model["feature_dims"] = table.feature_dims;
    model["alpha"] = cfg.alpha;
    model["beta"] = cfg.beta;
    model["regions"] = ds.regions;
    model["first_timestep"] = ds.first_timestep;
    model["n_timesteps"] = n_timesteps;
    model["seed"] = cfg.seed;
    model["config_hash"] = hash_hex(hash);
    model["tasks"] = json::array();
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const HmmTaskKey& k = specs[i].key;
      json tj;
      tj["mode"] = k.mode;
      tj["epsilon"] = k.epsilon;
      tj["multiplier"] = k.multiplier;
      tj["split"] = k.split;
      json cells = json::array();
      for (const CellRef& c : heldout[k.split]) {
        cells.push_back({c.r, c.t});
      }
      tj["heldout_cells"] = std::move(cells);
      tj["theta_estimate"] = fits[i].theta_estimate;
      tj["most_frequent_z"] = fits[i].most_frequent_z;
      tj["ledger_total"] = {{"epsilon", fits[i].ledger.total().epsilon},
                            {"delta", fits[i].ledger.total().delta}};
      if (cfg.save_samples) {
        json samples = json::array();
        for (const HmmSample& s : fits[i].samples) {
          samples.push_back({{"z", s.z}, {"theta", s.theta}});
        }
        tj["samples"] = std::move(samples);
      }
      model["tasks"].push_back(std::move(tj));
    }

    json report = base_report("hmm-fit", echo, hash, cfg.seed, out.ledger);
    report["n_regions"] = n_regions;
    report["n_timesteps"] = n_timesteps;
    report["n_heldout_cells_per_split"] = n_hold;
    report["n_tasks"] = specs.size();
    report["synthetic_source"] = synthetic;
    report["feature_names"] = table.feature_names;
    report["feature_dims"] = table.feature_dims;
    report["preprocess_messages"] = table.messages;

    const auto dir = experiment_dir(ctx, "hmm-fit");
    write_text(dir / "results.csv", csv.str());
    write_text(dir / "aggregate.csv", agg.str());
    write_text(dir / "assignments.csv", assign.str());
    write_text(dir / "theta.csv", theta.str());
    write_text(dir / "model.json", model.dump() + "\n");
    write_ledger_and_report(dir, out.ledger, report);
  }
  return out;
}

// --- hmm eval ----------------------------------------------------------

HmmEvalConfig parse_hmm_eval_config(const std::string& json_text) {
  const json j = parse_object(json_text, "hmm eval");
  check_keys(j, "hmm eval",
             {"model_path", "events_path", "preprocess", "task_index", "seed"});
  HmmEvalConfig c;
  c.model_path = get_or(j, "model_path", c.model_path, "hmm eval");
  c.events_path = get_or(j, "events_path", c.events_path, "hmm eval");
  if (j.contains("preprocess")) {
    c.preprocess = parse_preprocess(j.at("preprocess"));
  }
  c.task_index = get_or(j, "task_index", c.task_index, "hmm eval");
  c.seed = get_or(j, "seed", c.seed, "hmm eval");
  return c;
}

HmmEvalResult run_hmm_eval(const HmmEvalConfig& cfg, const RunContext& ctx) {
  require(!cfg.model_path.empty(), "hmm eval", "model_path is required");
  require(!cfg.events_path.empty(), "hmm eval", "events_path is required");
  require(cfg.task_index >= 0, "hmm eval", "task_index must be >= 0");

  const json echo = hmm_eval_json(cfg);
  const std::uint64_t hash = fnv1a64(echo.dump());

  std::ifstream mf(cfg.model_path, std::ios::binary);
  if (!mf) {
    throw std::runtime_error("hmm eval: cannot read model file: " +
                             cfg.model_path);
  }
  json model;
  mf >> model;
  if (model.value("schema", std::string{}) != "dpbayes-hmm-model/1") {
    throw std::runtime_error(
        "hmm eval: unrecognized model schema (expected dpbayes-hmm-model/1)");
  }
  const json& tasks = model.at("tasks");
  if (cfg.task_index >= static_cast<int>(tasks.size())) {
    throw std::invalid_argument(
        "hmm eval: task_index out of range (model has " +
        std::to_string(tasks.size()) + " tasks)");
  }
  const json& tj = tasks[cfg.task_index];

  HmmConfig config;
  config.n_states = model.at("n_states").get<int>();
  config.feature_dims = model.at("feature_dims").get<std::vector<int>>();
  config.n_features = static_cast<int>(config.feature_dims.size());
  config.alpha = model.at("alpha").get<double>();
  config.beta = model.at("beta").get<double>();
  const double multiplier = tj.value("multiplier", 0.0);
  if (multiplier > 0.0) config.ops_trunc_multiplier = multiplier;
  config.validate();

  const std::string mode = tj.at("mode").get<std::string>();
  const double epsilon = tj.value("epsilon", 0.0);
  FitResult fitted;
  fitted.config = config;
  if (mode == "nonprivate") {
    fitted.mode = FitMode::nonprivate();
  } else if (mode == "laplace") {
    fitted.mode = FitMode::laplace(epsilon);
  } else if (mode == "ops") {
    fitted.mode = FitMode::ops(epsilon);
  } else {
    throw std::runtime_error("hmm eval: unknown mode in model: " + mode);
  }
  if (!tj.contains("samples") || tj.at("samples").empty()) {
    throw std::runtime_error(
        "hmm eval: model has no retained samples; rerun hmm fit with "
        "save_samples=true");
  }
  for (const json& sj : tj.at("samples")) {
    HmmSample s;
    s.z = sj.at("z").get<std::vector<std::vector<int>>>();
    s.theta =
        sj.at("theta").get<std::vector<std::vector<std::vector<double>>>>();
    fitted.samples.push_back(std::move(s));
  }
  fitted.theta_estimate =
      tj.at("theta_estimate").get<std::vector<std::vector<std::vector<double>>>>();
  fitted.most_frequent_z =
      tj.at("most_frequent_z").get<std::vector<std::vector<int>>>();

  EventTable table = preprocess(load_events_csv(cfg.events_path), cfg.preprocess);
  const HmmDataset ds = make_hmm_dataset(table);
  if (table.feature_dims != config.feature_dims) {
    throw std::invalid_argument(
        "hmm eval: event feature dimensions do not match the fitted model");
  }
  const int n_regions = ds.data.n_regions();
  const int n_timesteps = ds.data.n_timesteps();
  if (n_regions != static_cast<int>(model.at("regions").size()) ||
      n_timesteps != model.at("n_timesteps").get<int>()) {
    throw std::invalid_argument(
        "hmm eval: event grid (regions x months) does not match the fitted "
        "model");
  }

  std::vector<CellRef> cells;
  for (int r = 0; r < n_regions; ++r) {
    for (int t = 1; t <= n_timesteps; ++t) cells.push_back({r, t});
  }

  HmmEvalResult res;
  res.key = {mode, epsilon, multiplier, tj.value("split", 0)};
  res.n_cells = static_cast<int>(cells.size());
  res.loglik = heldout_loglik(fitted, ds.data, cells, config);

  if (!ctx.out_dir.empty()) {
    std::ostringstream csv;
    csv << csv_prefix(hash, cfg.seed,
                      "mode,epsilon,multiplier,split,n_cells,loglik");
    csv << res.key.mode << ',' << fmt_double(res.key.epsilon) << ','
        << fmt_double(res.key.multiplier) << ',' << res.key.split << ','
        << res.n_cells << ',' << fmt_double(res.loglik) << '\n';

    json report = base_report("hmm-eval", echo, hash, cfg.seed, res.ledger);
    report["loglik"] = res.loglik;
    report["n_cells"] = res.n_cells;
    report["n_samples"] = fitted.samples.size();
    report["note"] =
        "evaluation is post-processing of an already-released model; the "
        "ledger is empty";

    const auto dir = experiment_dir(ctx, "hmm-eval");
    write_text(dir / "results.csv", csv.str());
    write_ledger_and_report(dir, res.ledger, report);
  }
  return res;
}

// --- synth -------------------------------------------------------------

SynthRunConfig parse_synth_config(const std::string& json_text) {
  const json j = parse_object(json_text, "synth");
  check_keys(j, "synth", {"synth", "seed"});
  SynthRunConfig c;
  c.synth = j.contains("synth") ? parse_synth_block(j.at("synth"))
                                : parse_synth_block(json::object());
  c.seed = get_or(j, "seed", c.seed, "synth");
  return c;
}

SynthRunResult run_synth(const SynthRunConfig& cfg, const RunContext& ctx) {
  cfg.synth.validate();
  const json echo = synth_run_json(cfg);
  const std::uint64_t hash = fnv1a64(echo.dump());

  const Rng root(cfg.seed);
  Rng gen_rng = root.stream(0);
  SynthRunResult res;
  res.data = synth_generate(cfg.synth, gen_rng);

  if (!ctx.out_dir.empty()) {
    const auto dir = experiment_dir(ctx, "synth");
    // results.csv stays directly loadable as an event log, so the usual
    // config-hash comment line is omitted (report.json carries it).
    write_events_csv(res.data.events, (dir / "results.csv").string());
    write_z_csv(res.data.z, res.data.regions, (dir / "z_true.csv").string());

    json report = base_report("synth", echo, hash, cfg.seed, res.ledger);
    report["n_records"] = res.data.events.records.size();
    report["truth"] = {{"trans", res.data.trans}, {"theta", res.data.theta}};
    report["note"] =
        "generation from the model is not a release; the ledger is empty";
    write_ledger_and_report(dir, res.ledger, report);
  }
  return res;
}

}  // namespace dpbayes
