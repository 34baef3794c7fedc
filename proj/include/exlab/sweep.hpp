#pragma once

/// \file sweep.hpp
/// Multi-trial experiment grid over loss variants, K values and data
/// budgets, with success-rate summaries and CSV / SVG output.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "exlab/env_io.hpp"
#include "exlab/learning/learn.hpp"
#include "exlab/validation.hpp"
#include "exlab/zoo.hpp"

namespace exlab {

/// Where the environment comes from: a catalog entry or a file.
struct EnvSource {
  std::string zoo;
  ZooParams params;
  std::string file;

  ExBmdp load() const {
    if (!file.empty()) return load_env(file);
    return zoo_build(zoo, params).env;
  }

  std::string display_name() const {
    if (!file.empty()) return std::filesystem::path(file).stem().string();
    std::string s = zoo;
    if (!params.empty()) {
      s += "(";
      bool first = true;
      for (const auto& [k, v] : params) {
        s += (first ? "" : ";") + k + "=" + std::to_string(v);
        first = false;
      }
      s += ")";
    }
    return s;
  }
};

struct SweepConfig {
  EnvSource env;
  std::vector<LossVariant> variants{LossVariant::ACState, LossVariant::ACDF};
  std::vector<std::size_t> K{1};
  std::vector<std::size_t> steps{500, 1000, 2000, 4000, 8000, 16000};
  std::size_t trials = 50;
  std::uint64_t base_seed = 0;
  /// Each dataset of `steps` total steps is split into this many trajectories.
  std::size_t trajectories = 1;
  StartMode start;
  double tolerance = 0.001;
  double smoothing_floor = 1e-7;

  void validate() const {
    if (env.zoo.empty() && env.file.empty()) throw Error(ErrorKind::SchemaError, "env: give a zoo name or a file");
    if (variants.empty()) throw Error(ErrorKind::SchemaError, "variants: empty");
    if (K.empty()) throw Error(ErrorKind::SchemaError, "K: empty");
    if (steps.empty()) throw Error(ErrorKind::SchemaError, "steps: empty");
    if (trials < 1) throw Error(ErrorKind::SchemaError, "trials must be at least 1");
    if (trajectories < 1) throw Error(ErrorKind::SchemaError, "trajectories must be at least 1");
    for (std::size_t k : K)
      if (k < 1) throw Error(ErrorKind::SchemaError, "K values must be at least 1");
    for (std::size_t s : steps)
      if (s / trajectories < 2) throw Error(ErrorKind::SchemaError, "steps value " + std::to_string(s) + " is too small");
  }

  std::size_t k_max() const { return *std::max_element(K.begin(), K.end()); }

  /// Trial seed: stream `trial` of the base seed.
  std::uint64_t trial_seed(std::size_t trial) const { return derive_seed(base_seed, trial); }

  static SweepConfig from_json(const nlohmann::json& j) {
    SweepConfig c;
    try {
      if (!j.is_object()) throw Error(ErrorKind::SchemaError, "$: expected an object");
      const auto& e = j.at("env");
      if (e.contains("file")) c.env.file = e.at("file").get<std::string>();
      if (e.contains("zoo")) c.env.zoo = e.at("zoo").get<std::string>();
      if (e.contains("params"))
        for (const auto& [k, v] : e.at("params").items()) c.env.params[k] = v.get<long long>();
      if (j.contains("variants")) {
        c.variants.clear();
        for (const auto& v : j.at("variants")) c.variants.push_back(parse_variant(v.get<std::string>()));
      }
      if (j.contains("K")) c.K = j.at("K").get<std::vector<std::size_t>>();
      if (j.contains("steps")) c.steps = j.at("steps").get<std::vector<std::size_t>>();
      if (j.contains("trials")) c.trials = j.at("trials").get<std::size_t>();
      if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
      if (j.contains("trajectories")) c.trajectories = j.at("trajectories").get<std::size_t>();
      if (j.contains("start")) c.start = StartMode::parse(j.at("start").get<std::string>());
      if (j.contains("tolerance")) c.tolerance = j.at("tolerance").get<double>();
      if (j.contains("smoothing_floor")) c.smoothing_floor = j.at("smoothing_floor").get<double>();
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorKind::SchemaError, std::string("sweep config: ") + ex.what());
    }
    c.validate();
    return c;
  }

  static SweepConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorKind::SchemaError, std::string("sweep config: ") + ex.what());
    }
    return from_json(j);
  }
};

struct SweepRow {
  std::string env;
  LossVariant variant = LossVariant::ACState;
  std::size_t K = 1;
  std::size_t steps = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::optional<OutcomeKind> outcome;
  std::uint32_t n_latent = 0;
  double loss = 0.0;
  std::string encoder;
  double runtime_ms = 0.0;
  /// Non-empty when the cell failed; the other result fields are then unset.
  std::string error;
};

struct SweepOptions {
  unsigned threads = 1;
  /// When false, runtime_ms is written as 0 so reruns compare byte for byte.
  bool record_time = true;
};

/// Runs the grid. Each trial samples one train and one validation dataset at
/// the largest budget; every smaller budget uses the leading steps of each
/// trajectory. All (variant, K) cells of a (trial, budget) pair share one
/// enumeration pass over a span window of max(K). Rows come back ordered by
/// (trial, variant, K, budget) in configuration order.
inline std::vector<SweepRow> run_sweep(const SweepConfig& config, const SweepOptions& options = {}) {
  config.validate();
  const ExBmdp env = config.env.load();
  require_enumerable(env.n_obs());
  const std::string env_name = config.env.display_name();
  const std::size_t max_steps = *std::max_element(config.steps.begin(), config.steps.end());
  const std::size_t k_max = config.k_max();

  std::vector<LossConfig> cells;
  for (LossVariant v : config.variants)
    for (std::size_t k : config.K) {
      LossConfig lc;
      lc.variant = v;
      lc.K = k;
      lc.tolerance = config.tolerance;
      lc.smoothing_floor = config.smoothing_floor;
      cells.push_back(lc);
    }

  std::vector<std::pair<TrajectoryDataset, TrajectoryDataset>> data(config.trials);
  parallel_for(config.trials, options.threads, [&](std::size_t trial) {
    DataParams dp{config.trajectories, max_steps / config.trajectories, config.start};
    data[trial] = sample_train_validation(env, dp, config.trial_seed(trial));
  });

  const std::size_t n_budgets = config.steps.size();
  std::vector<std::vector<SweepRow>> unit_rows(config.trials * n_budgets);
  parallel_for(unit_rows.size(), options.threads, [&](std::size_t u) {
    const std::size_t trial = u / n_budgets, b = u % n_budgets;
    const std::size_t steps = config.steps[b];
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<SweepRow> rows(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      rows[c].env = env_name;
      rows[c].variant = cells[c].variant;
      rows[c].K = cells[c].K;
      rows[c].steps = steps;
      rows[c].trial = trial;
      rows[c].seed = config.trial_seed(trial);
    }
    try {
      const std::size_t len = steps / config.trajectories;
      auto truncate = [len](const TrajectoryDataset& full) {
        TrajectoryDataset d = full;
        for (auto& tr : d.trajectories) {
          tr.obs.resize(len);
          tr.actions.resize(len);
        }
        d.total_steps = len * d.trajectories.size();
        return d;
      };
      const TrajectoryDataset train = truncate(data[trial].first), validation = truncate(data[trial].second);
      const ObjectivePlan plan = plan_objectives(cells);
      LossEngine engine(sampled_components(plan.components, train, validation, k_max, env.n_obs(), env.n_actions()),
                        env.n_obs(), env.n_actions());
      const SearchResult sr = engine.search(plan.objectives, {1, false});
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const EncoderLoss& sel = sr.selections[c].selected;
        rows[c].outcome = classify(sel.encoder, env).kind;
        rows[c].n_latent = sel.encoder.n_latent;
        rows[c].loss = sel.loss;
        rows[c].encoder = sel.encoder.to_string();
      }
    } catch (const std::exception& ex) {
      for (auto& r : rows) r.error = ex.what();
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : rows) r.runtime_ms = options.record_time ? ms : 0.0;
    unit_rows[u] = std::move(rows);
  });

  std::vector<SweepRow> out;
  out.reserve(unit_rows.size() * cells.size());
  for (std::size_t trial = 0; trial < config.trials; ++trial)
    for (std::size_t c = 0; c < cells.size(); ++c)
      for (std::size_t b = 0; b < n_budgets; ++b) out.push_back(unit_rows[trial * n_budgets + b][c]);
  return out;
}

/// Success counts for one (env, variant, K, steps) cell. Failed cells count
/// as unsuccessful trials.
struct SummaryCell {
  std::string env;
  LossVariant variant = LossVariant::ACState;
  std::size_t K = 0;
  std::size_t steps = 0;
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t minimal = 0;
  std::size_t errors = 0;

  double rate_correct() const { return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0; }
  double rate_minimal() const { return n ? static_cast<double>(minimal) / static_cast<double>(n) : 0.0; }
};

inline std::vector<SummaryCell> summarize(const std::vector<SweepRow>& rows) {
  std::map<std::tuple<std::string, LossVariant, std::size_t, std::size_t>, SummaryCell> cells;
  for (const SweepRow& r : rows) {
    SummaryCell& c = cells[{r.env, r.variant, r.K, r.steps}];
    c.env = r.env;
    c.variant = r.variant;
    c.K = r.K;
    c.steps = r.steps;
    ++c.n;
    if (!r.error.empty()) ++c.errors;
    if (r.outcome == OutcomeKind::CorrectMinimal) ++c.minimal;
    if (r.outcome == OutcomeKind::CorrectMinimal || r.outcome == OutcomeKind::CorrectNonMinimal) ++c.correct;
  }
  std::vector<SummaryCell> out;
  for (auto& [key, c] : cells) out.push_back(c);
  return out;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

} // namespace detail

inline void write_rows_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "env,variant,K,steps,trial,seed,outcome,n_latent,loss,encoder,runtime_ms,error\n";
  for (const SweepRow& r : rows) {
    out << detail::csv_field(r.env) << ',' << to_string(r.variant) << ',' << r.K << ',' << r.steps << ',' << r.trial
        << ',' << r.seed << ',' << (r.outcome ? to_string(*r.outcome) : std::string("Error")) << ',' << r.n_latent
        << ',' << (r.error.empty() ? detail::format_double(r.loss) : std::string()) << ','
        << detail::csv_field(r.encoder) << ',' << detail::format_double(r.runtime_ms) << ','
        << detail::csv_field(r.error) << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryCell>& cells) {
  out << "env,variant,K,steps,trials,rate_correct,rate_minimal,errors\n";
  for (const SummaryCell& c : cells)
    out << detail::csv_field(c.env) << ',' << to_string(c.variant) << ',' << c.K << ',' << c.steps << ',' << c.n << ','
        << detail::format_double(c.rate_correct()) << ',' << detail::format_double(c.rate_minimal()) << ','
        << c.errors << '\n';
}

/// One SVG per (env, variant): minimal-success rate against data budget
/// (log scale), one line per K. Returns the written paths.
inline std::vector<std::string> write_svg_plots(const std::vector<SummaryCell>& cells, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::map<std::pair<std::string, LossVariant>, std::map<std::size_t, std::vector<const SummaryCell*>>> groups;
  for (const auto& c : cells) groups[{c.env, c.variant}][c.K].push_back(&c);
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::vector<std::string> written;
  for (const auto& [key, by_k] : groups) {
    const double W = 520, H = 340, left = 60, right = 110, top = 40, bottom = 50;
    double lo = 1e300, hi = 0;
    for (const auto& [k, pts] : by_k)
      for (const auto* p : pts) {
        lo = std::min(lo, std::log10(static_cast<double>(p->steps)));
        hi = std::max(hi, std::log10(static_cast<double>(p->steps)));
      }
    if (hi <= lo) hi = lo + 1;
    auto px = [&](double steps) { return left + (std::log10(steps) - lo) / (hi - lo) * (W - left - right); };
    auto py = [&](double rate) { return top + (1.0 - rate) * (H - top - bottom); };
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"22\" font-size=\"14\">" << key.first << " " << to_string(key.second)
        << ": minimal-success rate</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << W - right << "\" y2=\"" << py(0)
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << py(0) << "\" x2=\"" << left << "\" y2=\"" << py(1)
        << "\" stroke=\"black\"/>\n";
    for (double r : {0.0, 0.5, 1.0})
      svg << "<text x=\"" << left - 8 << "\" y=\"" << py(r) + 4 << "\" text-anchor=\"end\">" << r << "</text>\n";
    std::map<std::size_t, bool> ticks;
    for (const auto& [k, pts] : by_k)
      for (const auto* p : pts) ticks[p->steps] = true;
    for (const auto& [s, unused] : ticks)
      svg << "<text x=\"" << px(static_cast<double>(s)) << "\" y=\"" << py(0) + 18 << "\" text-anchor=\"middle\">" << s
          << "</text>\n";
    svg << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">steps</text>\n";
    std::size_t line = 0;
    for (const auto& [k, pts] : by_k) {
      const char* color = palette[line % 10];
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto* p : pts) svg << px(static_cast<double>(p->steps)) << ',' << py(p->rate_minimal()) << ' ';
      svg << "\"/>\n";
      svg << "<text x=\"" << W - right + 10 << "\" y=\"" << top + 16 * line + 4 << "\" fill=\"" << color << "\">K="
          << k << "</text>\n";
      ++line;
    }
    svg << "</svg>\n";
    std::string fname = key.first + "_" + to_string(key.second) + ".svg";
    for (char& ch : fname)
      if (ch == '(' || ch == ')' || ch == ';' || ch == '=' || ch == '/') ch = '_';
    const std::string path = (std::filesystem::path(dir) / fname).string();
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
    out << svg.str();
    written.push_back(path);
  }
  return written;
}

} // namespace exlab
