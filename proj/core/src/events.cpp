// Copyright 2026 The dpbayes Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpbayes/events.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpbayes/samplers.hpp"

namespace dpbayes {
namespace {

// Largest value accepted for numeric outcome canonicalization; columns with
// bigger values fall back to first-appearance indexing.
constexpr long kMaxNumericOutcome = 100000;

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(trim(tok));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_nonneg_int(const std::string& s, long* value) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  *value = v;
  return true;
}

std::vector<std::string> numeral_vocab(int dim) {
  std::vector<std::string> vocab(static_cast<size_t>(dim));
  for (int j = 0; j < dim; ++j) vocab[j] = std::to_string(j);
  return vocab;
}

void rebuild_cell_counts(EventTable* table) {
  std::map<std::pair<std::string, int>, int> tally;
  for (const auto& rec : table->records) {
    tally[{rec.region, rec.timestep}] += 1;
  }
  table->cell_counts.clear();
  for (const auto& [key, count] : tally) {
    table->cell_counts.emplace_back(key.first, key.second, count);
  }
}

// Numeric value a feature outcome stands for: the vocabulary token when it
// parses as a nonnegative integer, otherwise the index itself.
long outcome_value(const EventTable& table, int column, int index) {
  long v = 0;
  if (parse_nonneg_int(table.feature_vocab[column][index], &v)) return v;
  return index;
}

int find_column(const EventTable& table, const std::string& name,
                const char* what) {
  const auto it = std::find(table.feature_names.begin(),
                            table.feature_names.end(), name);
  if (it == table.feature_names.end()) {
    throw std::invalid_argument(std::string(what) + ": unknown column '" +
                                name + "'");
  }
  return static_cast<int>(it - table.feature_names.begin());
}

std::vector<double> simplex_or_throw(std::vector<double> row,
                                     const char* what) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) +
                                  ": components must be nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(what) + ": rows must sum to 1");
  }
  return row;
}

int discrete_draw(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (size_t j = 0; j < probs.size(); ++j) {
    cum += probs[j];
    if (u <= cum) return static_cast<int>(j);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

EventTable load_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("events: cannot open '" + path + "'");
  }

  EventTable table;
  std::string line;
  int line_no = 0;

  // Header.
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    header = split_csv(t);
    break;
  }
  if (header.size() < 2 || header[0] != "region" || header[1] != "timestep") {
    throw std::runtime_error(
        "events: " + path +
        ": header must start with 'region,timestep' followed by feature "
        "columns");
  }
  const int n_features = static_cast<int>(header.size()) - 2;
  std::vector<long> declared(static_cast<size_t>(n_features), -1);
  for (int d = 0; d < n_features; ++d) {
    std::string name = header[d + 2];
    const size_t colon = name.find(':');
    if (colon != std::string::npos) {
      long dim = 0;
      if (!parse_nonneg_int(name.substr(colon + 1), &dim) || dim < 1 ||
          dim > kMaxNumericOutcome) {
        throw std::runtime_error("events: " + path +
                                 ": bad domain declaration in column '" +
                                 name + "'");
      }
      declared[d] = dim;
      name = name.substr(0, colon);
    }
    if (name.empty()) {
      throw std::runtime_error("events: " + path + ": empty column name");
    }
    table.feature_names.push_back(name);
  }

  // Rows (tokens kept raw; outcome indexing is decided per column below).
  std::vector<std::vector<std::string>> raw;
  std::vector<int> raw_lines;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cols = split_csv(t);
    if (cols.size() != header.size()) {
      throw std::runtime_error(
          "events: " + path + ": line " + std::to_string(line_no) +
          ": expected " + std::to_string(header.size()) + " columns, got " +
          std::to_string(cols.size()));
    }
    long ts = 0;
    if (cols[0].empty()) {
      throw std::runtime_error("events: " + path + ": line " +
                               std::to_string(line_no) + ": empty region");
    }
    if (!parse_nonneg_int(cols[1], &ts)) {
      throw std::runtime_error("events: " + path + ": line " +
                               std::to_string(line_no) +
                               ": timestep must be a nonnegative integer");
    }
    EventRecord rec;
    rec.region = cols[0];
    rec.timestep = static_cast<int>(ts);
    rec.features.assign(static_cast<size_t>(n_features), 0);
    table.records.push_back(std::move(rec));
    raw.emplace_back(cols.begin() + 2, cols.end());
    raw_lines.push_back(line_no);
  }

  if (table.records.empty()) {
    table.messages.push_back("warning: no data rows");
  }

  // Per-column outcome encoding.
  table.feature_dims.assign(static_cast<size_t>(n_features), 0);
  table.feature_vocab.resize(static_cast<size_t>(n_features));
  for (int d = 0; d < n_features; ++d) {
    bool numeric = true;
    long max_value = -1;
    for (const auto& row : raw) {
      long v = 0;
      if (!parse_nonneg_int(row[d], &v) || v > kMaxNumericOutcome) {
        numeric = false;
        break;
      }
      max_value = std::max(max_value, v);
    }
    if (declared[d] >= 0 || numeric) {
      // Canonical numeric encoding: outcome j is the token "j".
      long dim = declared[d] >= 0 ? declared[d] : max_value + 1;
      if (dim < 1) dim = declared[d] >= 0 ? declared[d] : 0;
      std::unordered_map<std::string, int> extra;
      for (size_t i = 0; i < raw.size(); ++i) {
        long v = 0;
        if (parse_nonneg_int(raw[i][d], &v) && v <= kMaxNumericOutcome) {
          if (v >= dim) {
            table.messages.push_back(
                "column " + table.feature_names[d] + ": value '" + raw[i][d] +
                "' outside declared domain, index appended (line " +
                std::to_string(raw_lines[i]) + ")");
            dim = v + 1;
          }
          table.records[i].features[d] = static_cast<int>(v);
        } else {
          auto [it, inserted] =
              extra.emplace(raw[i][d], static_cast<int>(dim) +
                                           static_cast<int>(extra.size()));
          if (inserted) {
            table.messages.push_back(
                "column " + table.feature_names[d] + ": value '" + raw[i][d] +
                "' outside declared domain, index appended (line " +
                std::to_string(raw_lines[i]) + ")");
          }
          table.records[i].features[d] = it->second;
        }
      }
      table.feature_vocab[d] = numeral_vocab(static_cast<int>(dim));
      if (!extra.empty()) {
        std::vector<std::pair<std::string, int>> sorted(extra.begin(),
                                                        extra.end());
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) {
                    return a.second < b.second;
                  });
        for (const auto& [tok, idx] : sorted) {
          (void)idx;
          table.feature_vocab[d].push_back(tok);
        }
      }
      table.feature_dims[d] = static_cast<int>(table.feature_vocab[d].size());
    } else {
      // First-appearance categorical encoding.
      std::unordered_map<std::string, int> index;
      for (size_t i = 0; i < raw.size(); ++i) {
        auto [it, inserted] =
            index.emplace(raw[i][d], static_cast<int>(index.size()));
        if (inserted) table.feature_vocab[d].push_back(raw[i][d]);
        table.records[i].features[d] = it->second;
      }
      table.feature_dims[d] = static_cast<int>(table.feature_vocab[d].size());
    }
  }

  rebuild_cell_counts(&table);
  return table;
}

EventTable preprocess(const EventTable& input, const PreprocessRules& rules) {
  EventTable table = input;

  for (const auto& name : rules.binarize) {
    const int d = find_column(table, name, "preprocess");
    for (auto& rec : table.records) {
      rec.features[d] = outcome_value(table, d, rec.features[d]) > 0 ? 1 : 0;
    }
    table.messages.push_back("binarized column '" + name + "' (dim " +
                             std::to_string(table.feature_dims[d]) + " -> 2)");
    table.feature_dims[d] = 2;
    table.feature_vocab[d] = numeral_vocab(2);
  }

  for (const auto& [merged_name, sources] : rules.merge_disjunctive) {
    if (sources.empty()) {
      throw std::invalid_argument("preprocess: merge '" + merged_name +
                                  "' has no source columns");
    }
    std::vector<int> cols;
    for (const auto& src : sources) {
      cols.push_back(find_column(table, src, "preprocess"));
    }
    std::vector<int> sorted_cols = cols;
    std::sort(sorted_cols.begin(), sorted_cols.end());
    for (auto& rec : table.records) {
      int merged = 0;
      for (int d : cols) {
        if (outcome_value(table, d, rec.features[d]) > 0) merged = 1;
      }
      for (auto it = sorted_cols.rbegin(); it != sorted_cols.rend(); ++it) {
        rec.features.erase(rec.features.begin() + *it);
      }
      rec.features.push_back(merged);
    }
    std::string joined;
    for (auto it = sorted_cols.rbegin(); it != sorted_cols.rend(); ++it) {
      joined = (joined.empty() ? "" : joined + ", ") + table.feature_names[*it];
      table.feature_names.erase(table.feature_names.begin() + *it);
      table.feature_dims.erase(table.feature_dims.begin() + *it);
      table.feature_vocab.erase(table.feature_vocab.begin() + *it);
    }
    table.feature_names.push_back(merged_name);
    table.feature_dims.push_back(2);
    table.feature_vocab.push_back(numeral_vocab(2));
    table.messages.push_back("merged columns {" + joined + "} into '" +
                             merged_name + "' disjunctively");
  }

  if (rules.min_region_records > 0) {
    std::map<std::string, int> per_region;
    for (const auto& rec : table.records) per_region[rec.region] += 1;
    std::set<std::string> dropped;
    for (const auto& [region, count] : per_region) {
      if (count < rules.min_region_records) dropped.insert(region);
    }
    if (!dropped.empty()) {
      std::vector<EventRecord> kept;
      for (auto& rec : table.records) {
        if (dropped.count(rec.region) == 0) kept.push_back(std::move(rec));
      }
      table.records = std::move(kept);
      for (const auto& region : dropped) {
        table.messages.push_back("dropped region '" + region +
                                 "' (fewer than " +
                                 std::to_string(rules.min_region_records) +
                                 " records)");
      }
    }
  }

  if (rules.drop_empty_timesteps && !table.records.empty()) {
    std::set<int> seen;
    int lo = table.records[0].timestep;
    int hi = lo;
    for (const auto& rec : table.records) {
      seen.insert(rec.timestep);
      lo = std::min(lo, rec.timestep);
      hi = std::max(hi, rec.timestep);
    }
    std::map<int, int> remap;
    int next = 0;
    for (int t = lo; t <= hi; ++t) {
      if (seen.count(t) != 0) {
        remap[t] = next++;
      } else {
        table.messages.push_back("dropped empty timestep " +
                                 std::to_string(t));
      }
    }
    for (auto& rec : table.records) rec.timestep = remap[rec.timestep];
  }

  rebuild_cell_counts(&table);
  return table;
}

void SynthConfig::validate() const {
  model.validate();
  if (n_regions < 1 || n_timesteps < 1 || n_per_cell < 1) {
    throw std::invalid_argument("synth: sizes must be >= 1");
  }
  const int k = model.n_states;
  if (trans.has_value()) {
    if (trans->size() != static_cast<size_t>(k) + 1) {
      throw std::invalid_argument("synth: trans must have K+1 rows");
    }
    for (const auto& row : *trans) {
      if (row.size() != static_cast<size_t>(k)) {
        throw std::invalid_argument("synth: trans rows must have K entries");
      }
      simplex_or_throw(row, "synth: trans");
    }
  } else if (self_transition.has_value()) {
    if (!(*self_transition > 0.0) || !(*self_transition < 1.0)) {
      throw std::invalid_argument("synth: self_transition must be in (0,1)");
    }
    if (k < 2) {
      throw std::invalid_argument(
          "synth: self_transition needs at least 2 states");
    }
  }
  if (theta.has_value()) {
    if (theta->size() != static_cast<size_t>(k)) {
      throw std::invalid_argument("synth: theta must have K state rows");
    }
    for (const auto& per_state : *theta) {
      if (per_state.size() != static_cast<size_t>(model.n_features)) {
        throw std::invalid_argument("synth: theta must have D feature rows");
      }
      for (size_t d = 0; d < per_state.size(); ++d) {
        if (per_state[d].size() !=
            static_cast<size_t>(model.feature_dims[d])) {
          throw std::invalid_argument("synth: theta row dimension mismatch");
        }
        simplex_or_throw(per_state[d], "synth: theta");
      }
    }
  } else if (emission_peak.has_value()) {
    if (!(*emission_peak > 0.0) || !(*emission_peak < 1.0)) {
      throw std::invalid_argument("synth: emission_peak must be in (0,1)");
    }
  }
}

SynthResult synth_generate(const SynthConfig& config, Rng& rng) {
  config.validate();
  const int K = config.model.n_states;
  const int D = config.model.n_features;

  SynthResult out;

  // Transition rows (row 0 = dummy initial state).
  if (config.trans.has_value()) {
    out.trans = *config.trans;
  } else if (config.self_transition.has_value()) {
    const double s = *config.self_transition;
    out.trans.assign(static_cast<size_t>(K) + 1,
                     std::vector<double>(static_cast<size_t>(K), 1.0 / K));
    for (int k = 1; k <= K; ++k) {
      for (int j = 0; j < K; ++j) {
        out.trans[k][j] = (j == k - 1) ? s : (1.0 - s) / (K - 1);
      }
    }
  } else if (K == 1) {
    out.trans.assign(2, {1.0});
  } else {
    for (int k = 0; k <= K; ++k) {
      out.trans.push_back(truncated_dirichlet_draw(
          std::vector<double>(static_cast<size_t>(K), config.model.alpha), 0.0,
          rng));
    }
  }

  // Emission tables.
  if (config.theta.has_value()) {
    out.theta = *config.theta;
  } else if (config.emission_peak.has_value()) {
    const double q = *config.emission_peak;
    out.theta.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
      out.theta[k].resize(static_cast<size_t>(D));
      for (int d = 0; d < D; ++d) {
        const int dim = config.model.feature_dims[d];
        const int peak = (k + d) % dim;
        out.theta[k][d].assign(static_cast<size_t>(dim),
                               (1.0 - q) / (dim - 1));
        out.theta[k][d][peak] = q;
      }
    }
  } else {
    out.theta.resize(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
      out.theta[k].resize(static_cast<size_t>(D));
      for (int d = 0; d < D; ++d) {
        out.theta[k][d] = truncated_dirichlet_draw(
            std::vector<double>(
                static_cast<size_t>(config.model.feature_dims[d]),
                config.model.beta),
            0.0, rng);
      }
    }
  }

  // Chains and records.
  EventTable& events = out.events;
  for (int d = 0; d < D; ++d) {
    events.feature_names.push_back("f" + std::to_string(d + 1));
    events.feature_dims.push_back(config.model.feature_dims[d]);
    events.feature_vocab.push_back(
        numeral_vocab(config.model.feature_dims[d]));
  }
  out.z.resize(static_cast<size_t>(config.n_regions));
  for (int r = 0; r < config.n_regions; ++r) {
    out.regions.push_back("r" + std::to_string(r));
    out.z[r].assign(static_cast<size_t>(config.n_timesteps) + 1, 0);
    for (int t = 1; t <= config.n_timesteps; ++t) {
      out.z[r][t] = 1 + discrete_draw(out.trans[out.z[r][t - 1]], rng);
      for (int i = 0; i < config.n_per_cell; ++i) {
        EventRecord rec;
        rec.region = out.regions[r];
        rec.timestep = t - 1;
        rec.features.resize(static_cast<size_t>(D));
        for (int d = 0; d < D; ++d) {
          rec.features[d] = discrete_draw(out.theta[out.z[r][t] - 1][d], rng);
        }
        events.records.push_back(std::move(rec));
      }
    }
  }
  rebuild_cell_counts(&events);
  return out;
}

void write_events_csv(const EventTable& table, const std::string& path) {
  std::ofstream outf(path);
  if (!outf) {
    throw std::runtime_error("events: cannot write '" + path + "'");
  }
  outf << "region,timestep";
  for (int d = 0; d < table.n_features(); ++d) {
    outf << ',' << table.feature_names[d] << ':' << table.feature_dims[d];
  }
  outf << '\n';
  for (const auto& rec : table.records) {
    outf << rec.region << ',' << rec.timestep;
    for (size_t d = 0; d < rec.features.size(); ++d) {
      outf << ',' << table.feature_vocab[d][rec.features[d]];
    }
    outf << '\n';
  }
}

void write_z_csv(const std::vector<std::vector<int>>& z,
                 const std::vector<std::string>& regions,
                 const std::string& path) {
  std::ofstream outf(path);
  if (!outf) {
    throw std::runtime_error("events: cannot write '" + path + "'");
  }
  outf << "region,timestep,state\n";
  for (size_t r = 0; r < z.size(); ++r) {
    for (size_t t = 1; t < z[r].size(); ++t) {
      outf << regions[r] << ',' << (t - 1) << ',' << z[r][t] << '\n';
    }
  }
}

HmmDataset make_hmm_dataset(const EventTable& table) {
  HmmDataset out;
  const int n_features = table.n_features();
  if (table.records.empty()) return out;

  int lo = table.records[0].timestep;
  int hi = lo;
  std::unordered_map<std::string, int> region_index;
  for (const auto& rec : table.records) {
    lo = std::min(lo, rec.timestep);
    hi = std::max(hi, rec.timestep);
    if (region_index.emplace(rec.region, static_cast<int>(out.regions.size()))
            .second) {
      out.regions.push_back(rec.region);
    }
  }
  out.first_timestep = lo;
  const int n_regions = static_cast<int>(out.regions.size());
  const int n_timesteps = hi - lo + 1;

  out.data.counts.resize(static_cast<size_t>(n_regions));
  out.data.n_entries.assign(static_cast<size_t>(n_regions),
                            std::vector<double>(
                                static_cast<size_t>(n_timesteps), 0.0));
  for (int r = 0; r < n_regions; ++r) {
    out.data.counts[r].resize(static_cast<size_t>(n_timesteps));
    for (int t0 = 0; t0 < n_timesteps; ++t0) {
      out.data.counts[r][t0].resize(static_cast<size_t>(n_features));
      for (int d = 0; d < n_features; ++d) {
        out.data.counts[r][t0][d].assign(
            static_cast<size_t>(table.feature_dims[d]), 0.0);
      }
    }
  }
  for (const auto& rec : table.records) {
    const int r = region_index[rec.region];
    const int t0 = rec.timestep - lo;
    for (int d = 0; d < n_features; ++d) {
      out.data.counts[r][t0][d][rec.features[d]] += 1.0;
    }
    out.data.n_entries[r][t0] += 1.0;
  }
  return out;
}

}  // namespace dpbayes
