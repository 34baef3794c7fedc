#pragma once

/// \file sampling.hpp
/// Trajectory collection under a latent-conditioned behavior policy, span
/// windowing, and the line-oriented dataset cache format.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "exlab/analysis.hpp"
#include "exlab/core.hpp"
#include "exlab/parallel.hpp"
#include "exlab/rng.hpp"

namespace exlab {

enum class StartKind { UniformObs, PerCommunicatingClass, Fixed, EnvInitial };

/// How the first observation of each trajectory is chosen. `Fixed` cycles
/// through `fixed` by trajectory index; `EnvInitial` draws from the
/// environment's initial distribution.
struct StartMode {
  StartKind kind = StartKind::UniformObs;
  std::vector<std::size_t> fixed;

  static StartMode uniform() { return {}; }
  static StartMode per_class() { return {StartKind::PerCommunicatingClass, {}}; }
  static StartMode fixed_at(std::vector<std::size_t> obs) { return {StartKind::Fixed, std::move(obs)}; }
  static StartMode env_initial() { return {StartKind::EnvInitial, {}}; }

  std::string to_string() const {
    switch (kind) {
      case StartKind::UniformObs: return "uniform";
      case StartKind::PerCommunicatingClass: return "per-class";
      case StartKind::EnvInitial: return "initial";
      case StartKind::Fixed: {
        std::string s = "fixed:";
        for (std::size_t i = 0; i < fixed.size(); ++i) s += (i ? "," : "") + std::to_string(fixed[i]);
        return s;
      }
    }
    return "uniform";
  }

  static StartMode parse(const std::string& text) {
    if (text == "uniform") return uniform();
    if (text == "per-class") return per_class();
    if (text == "initial") return env_initial();
    if (text.rfind("fixed:", 0) == 0) {
      StartMode m{StartKind::Fixed, {}};
      std::string rest = text.substr(6);
      for (char& c : rest)
        if (c == ',') c = ' ';
      std::istringstream is(rest);
      std::size_t v;
      while (is >> v) m.fixed.push_back(v);
      if (m.fixed.empty()) throw Error(ErrorKind::SchemaError, "fixed start list is empty");
      return m;
    }
    throw Error(ErrorKind::SchemaError, "unknown start mode '" + text + "'");
  }
};

/// Observations and the actions taken at them; both have the same length.
struct Trajectory {
  std::vector<std::size_t> obs;
  std::vector<std::size_t> actions;
  std::size_t size() const { return obs.size(); }
};

struct TrajectoryDataset {
  std::vector<Trajectory> trajectories;
  std::size_t total_steps = 0;
  std::uint64_t seed = 0;
  StartMode start_mode;
};

/// Action distribution per latent label of `encoder`.
struct Policy {
  Encoder encoder;
  std::vector<std::vector<double>> action_probs;

  /// Uniform over actions everywhere.
  static Policy uniform(std::size_t n_obs, std::size_t n_actions) {
    Policy p;
    p.encoder = Encoder::all_in_one(n_obs);
    p.action_probs = {std::vector<double>(n_actions, 1.0 / static_cast<double>(n_actions))};
    return p;
  }
};

namespace detail {

inline std::size_t draw_categorical(Rng& rng, const std::vector<double>& probs) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return 0;
}

inline std::size_t draw_next(Rng& rng, const std::vector<Transition>& edges) {
  if (edges.size() == 1) return edges.front().next;
  const double u = rng.uniform01();
  double acc = 0.0;
  for (const Transition& t : edges) {
    acc += t.prob;
    if (u < acc) return t.next;
  }
  return edges.back().next;
}

} // namespace detail

/// Collects `n_trajectories` trajectories of `length` steps. Trajectory i uses
/// its own random stream, so the result is independent of `threads`. With
/// no policy given, actions are uniform.
inline TrajectoryDataset sample_dataset(const ExBmdp& env, std::size_t n_trajectories, std::size_t length,
                                        std::uint64_t seed, const StartMode& start = {},
                                        const Policy* policy = nullptr, unsigned threads = 1) {
  if (length < 2) throw Error(ErrorKind::LengthTooShort, "trajectory length must be at least 2");
  if (n_trajectories == 0) throw Error(ErrorKind::TooFewTrajectories, "need at least one trajectory");
  const std::size_t n = env.n_obs();
  const std::size_t na = env.n_actions();

  std::vector<std::vector<std::size_t>> classes;
  if (start.kind == StartKind::PerCommunicatingClass) {
    classes = communicating_classes(env);
    if (n_trajectories < classes.size())
      throw Error(ErrorKind::TooFewTrajectories, std::to_string(n_trajectories) + " trajectories for " +
                                                     std::to_string(classes.size()) + " communicating classes");
  }
  if (start.kind == StartKind::Fixed) {
    if (start.fixed.empty()) throw Error(ErrorKind::SchemaError, "fixed start list is empty");
    for (std::size_t x : start.fixed)
      if (x >= n) throw Error(ErrorKind::InitialOffSupport, "fixed start " + std::to_string(x) + " is not an observation");
  }
  if (policy) {
    if (policy->encoder.size() != n) throw Error(ErrorKind::ConfigMismatch, "policy encoder size differs from observation count");
    if (policy->action_probs.size() < policy->encoder.n_latent)
      throw Error(ErrorKind::ConfigMismatch, "policy lacks action probabilities for some latent labels");
  }

  TrajectoryDataset ds;
  ds.seed = seed;
  ds.start_mode = start;
  ds.trajectories.resize(n_trajectories);
  parallel_for(n_trajectories, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    std::size_t x = 0;
    switch (start.kind) {
      case StartKind::UniformObs: x = rng.uniform_index(n); break;
      case StartKind::PerCommunicatingClass:
        if (i < classes.size()) x = classes[i][rng.uniform_index(classes[i].size())];
        else x = rng.uniform_index(n);
        break;
      case StartKind::Fixed: x = start.fixed[i % start.fixed.size()]; break;
      case StartKind::EnvInitial: x = detail::draw_categorical(rng, env.initial()); break;
    }
    Trajectory& tr = ds.trajectories[i];
    tr.obs.resize(length);
    tr.actions.resize(length);
    for (std::size_t t = 0; t < length; ++t) {
      tr.obs[t] = x;
      const std::size_t a = policy ? detail::draw_categorical(rng, policy->action_probs[policy->encoder[x]])
                                   : rng.uniform_index(na);
      tr.actions[t] = a;
      if (t + 1 < length) x = detail::draw_next(rng, env.transitions(x, a));
    }
  });
  ds.total_steps = n_trajectories * length;
  return ds;
}

/// True when every recorded transition has positive probability under `env`.
inline bool dataset_consistent(const ExBmdp& env, const TrajectoryDataset& ds) {
  std::size_t total = 0;
  for (const Trajectory& tr : ds.trajectories) {
    if (tr.obs.size() != tr.actions.size()) return false;
    total += tr.size();
    for (std::size_t t = 0; t < tr.size(); ++t) {
      if (tr.obs[t] >= env.n_obs() || tr.actions[t] >= env.n_actions()) return false;
      if (t + 1 < tr.size() && env.prob(tr.obs[t], tr.actions[t], tr.obs[t + 1]) <= 0.0) return false;
    }
  }
  return total == ds.total_steps;
}

/// Usable anchor times per trajectory for a window of `k_max` steps. A
/// trajectory of length L contributes anchors t = 0 .. L - k_max - 2, and
/// every span (x_t, a_t, x_{t+k}) with 1 <= k <= k_max stays inside it.
struct SpanIndex {
  std::size_t k_max = 0;
  std::vector<std::size_t> anchors;
  const TrajectoryDataset* data = nullptr;

  std::size_t total_anchors() const {
    std::size_t s = 0;
    for (std::size_t a : anchors) s += a;
    return s;
  }
};

inline SpanIndex span_index(const TrajectoryDataset& ds, std::size_t k_max) {
  if (k_max == 0) throw Error(ErrorKind::KMaxTooLarge, "K_max must be at least 1");
  SpanIndex idx;
  idx.k_max = k_max;
  idx.data = &ds;
  for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
    const std::size_t len = ds.trajectories[i].size();
    if (len < k_max + 2)
      throw Error(ErrorKind::KMaxTooLarge, "trajectory " + std::to_string(i) + " of length " + std::to_string(len) +
                                               " has no anchor for K_max=" + std::to_string(k_max));
    idx.anchors.push_back(len - k_max - 1);
  }
  return idx;
}

/// Writes the cache format: one header line, then one line per trajectory
/// holding "obs action obs action ...".
inline void write_dataset(std::ostream& out, const TrajectoryDataset& ds, const std::string& note = "") {
  out << "# exlab-dataset seed=" << ds.seed << " trajectories=" << ds.trajectories.size()
      << " steps=" << ds.total_steps << " start=" << ds.start_mode.to_string();
  if (!note.empty()) out << " " << note;
  out << "\n";
  for (const Trajectory& tr : ds.trajectories) {
    for (std::size_t t = 0; t < tr.size(); ++t) out << (t ? " " : "") << tr.obs[t] << ' ' << tr.actions[t];
    out << "\n";
  }
}

inline TrajectoryDataset read_dataset(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# exlab-dataset", 0) != 0)
    throw Error(ErrorKind::SchemaError, "dataset cache: missing header line");
  TrajectoryDataset ds;
  std::istringstream hs(header.substr(15));
  std::string field;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
    if (key == "seed") ds.seed = std::stoull(val);
    else if (key == "start") ds.start_mode = StartMode::parse(val);
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Trajectory tr;
    std::size_t x, a;
    while (ls >> x) {
      if (!(ls >> a)) throw Error(ErrorKind::SchemaError, "dataset cache: odd number of fields in a trajectory line");
      tr.obs.push_back(x);
      tr.actions.push_back(a);
    }
    ds.total_steps += tr.size();
    ds.trajectories.push_back(std::move(tr));
  }
  return ds;
}

} // namespace exlab
