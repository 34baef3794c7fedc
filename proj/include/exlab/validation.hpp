#pragma once

/// \file validation.hpp
/// Judges a learned encoder against the environment's ground truth. An
/// encoder is valid when its induced latent dynamics are deterministic and
/// the true endogenous state is a function of (exogenous state, cyclic class
/// of the true endogenous state, learned label).

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "exlab/analysis.hpp"
#include "exlab/core.hpp"
#include "exlab/learning/encoders.hpp"
#include "exlab/parallel.hpp"

namespace exlab {

/// Two observations with the same label and action whose successors get
/// different labels.
struct NondeterminismWitness {
  std::size_t obs_first = 0;
  std::size_t obs_second = 0;
  std::size_t action = 0;
  std::size_t next_first = 0;
  std::size_t next_second = 0;
};

struct InducedDynamics {
  bool deterministic = true;
  /// table[label][action] = successor label (meaningful when deterministic).
  std::vector<std::vector<std::uint32_t>> table;
  std::optional<NondeterminismWitness> witness;
};

inline InducedDynamics induced_dynamics(const Encoder& enc, const ExBmdp& env) {
  if (enc.size() != env.n_obs()) throw Error(ErrorKind::ConfigMismatch, "encoder size differs from observation count");
  const std::size_t na = env.n_actions();
  InducedDynamics out;
  out.table.assign(enc.n_latent, std::vector<std::uint32_t>(na, 0));
  // first observation (and its successor) that fixed each (label, action) cell
  std::vector<std::vector<std::optional<std::pair<std::size_t, std::size_t>>>> origin(
      enc.n_latent, std::vector<std::optional<std::pair<std::size_t, std::size_t>>>(na));
  for (std::size_t x = 0; x < env.n_obs(); ++x)
    for (std::size_t a = 0; a < na; ++a)
      for (const Transition& t : env.transitions(x, a)) {
        if (t.prob <= 0.0) continue;
        auto& cell = origin[enc[x]][a];
        if (!cell) {
          cell = std::make_pair(x, t.next);
          out.table[enc[x]][a] = enc[t.next];
        } else if (enc[cell->second] != enc[t.next]) {
          out.deterministic = false;
          out.witness = NondeterminismWitness{cell->first, x, a, cell->second, t.next};
          return out;
        }
      }
  return out;
}

/// (exogenous state, cyclic class of the true endogenous state) per observation.
inline std::vector<std::pair<std::size_t, std::size_t>> enhanced_exogenous_labels(const ExBmdp& env) {
  const Periodicity per = periodicity(env.endo());
  std::vector<std::pair<std::size_t, std::size_t>> out(env.n_obs());
  for (std::size_t x = 0; x < env.n_obs(); ++x) out[x] = {env.exo_state(x), per.cyclic_class[env.endo_state(x)]};
  return out;
}

enum class OutcomeKind { CorrectMinimal, CorrectNonMinimal, Incorrect };

inline std::string to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::CorrectMinimal: return "CorrectMinimal";
    case OutcomeKind::CorrectNonMinimal: return "CorrectNonMinimal";
    case OutcomeKind::Incorrect: return "Incorrect";
  }
  return "Incorrect";
}

/// Two observations sharing an enhanced exogenous label and a learned label
/// but differing in true endogenous state.
struct AmbiguityWitness {
  std::size_t obs_first = 0;
  std::size_t obs_second = 0;
};

struct Outcome {
  OutcomeKind kind = OutcomeKind::Incorrect;
  std::uint32_t n_latent = 0;
  std::size_t minimal_size = 0;
  std::optional<NondeterminismWitness> nondeterminism;
  std::optional<AmbiguityWitness> ambiguity;
  std::string detail;
};

namespace detail {

inline std::optional<AmbiguityWitness> find_ambiguity(const Encoder& enc, const ExBmdp& env,
                                                      const std::vector<std::pair<std::size_t, std::size_t>>& ebar) {
  std::map<std::tuple<std::size_t, std::size_t, std::uint32_t>, std::size_t> first;
  for (std::size_t x = 0; x < env.n_obs(); ++x) {
    const auto key = std::make_tuple(ebar[x].first, ebar[x].second, enc[x]);
    auto [it, fresh] = first.emplace(key, x);
    if (!fresh && env.endo_state(it->second) != env.endo_state(x)) return AmbiguityWitness{it->second, x};
  }
  return std::nullopt;
}

} // namespace detail

/// Both validity conditions, without the size comparison.
inline bool is_valid_encoder(const Encoder& enc, const ExBmdp& env,
                             const std::vector<std::pair<std::size_t, std::size_t>>& ebar) {
  return induced_dynamics(enc, env).deterministic && !detail::find_ambiguity(enc, env, ebar);
}

/// Smallest latent count among valid encoders. Sizes are tried in ascending
/// order; results are cached per environment.
inline std::size_t minimal_size(const ExBmdp& env, unsigned threads = 1) {
  require_enumerable(env.n_obs());
  static std::mutex cache_mutex;
  static std::map<std::string, std::size_t> cache;
  const std::string key = env.fingerprint();
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const auto ebar = enhanced_exogenous_labels(env);
  const std::size_t n = env.n_obs();
  std::size_t answer = 0;
  // Partition the walk by prefix so pieces can run in parallel; any hit at
  // size m is enough, and the minimum over pieces is order-independent.
  const std::size_t split = n <= 6 ? 1 : std::min<std::size_t>(6, n - 3);
  const auto prefixes = rgs_prefixes(split);
  for (std::size_t m = 1; m <= n && answer == 0; ++m) {
    std::vector<char> found(prefixes.size(), 0);
    parallel_for(prefixes.size(), threads, [&](std::size_t p) {
      if (!prefixes[p].empty() && *std::max_element(prefixes[p].begin(), prefixes[p].end()) + 1 > m) return;
      RgsCursor cur(n, prefixes[p]);
      do {
        if (cur.n_latent() != m) continue;
        if (is_valid_encoder(cur.encoder(), env, ebar)) {
          found[p] = 1;
          return;
        }
      } while (cur.advance());
    });
    bool any = false;
    for (char f : found) any = any || f;
    if (any) answer = m;
  }
  if (answer == 0) throw Error(ErrorKind::InvalidDynamics, "no valid encoder exists, not even the ground truth");
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(key, answer);
  return answer;
}

/// Classifies `enc` (canonicalized first) against the ground truth of `env`.
inline Outcome classify(const Encoder& raw, const ExBmdp& env, unsigned threads = 1) {
  const Encoder enc = Encoder::canonical(raw.assignment);
  if (enc.size() != env.n_obs()) throw Error(ErrorKind::ConfigMismatch, "encoder size differs from observation count");
  Outcome out;
  out.n_latent = enc.n_latent;
  const InducedDynamics dyn = induced_dynamics(enc, env);
  if (!dyn.deterministic) {
    const auto& w = *dyn.witness;
    std::ostringstream os;
    os << "latent dynamics are not deterministic: " << env.label(w.obs_first) << " -"
       << env.endo().action_names[w.action] << "-> " << env.label(w.next_first) << " but " << env.label(w.obs_second)
       << " -" << env.endo().action_names[w.action] << "-> " << env.label(w.next_second);
    out.kind = OutcomeKind::Incorrect;
    out.nondeterminism = w;
    out.detail = os.str();
    return out;
  }
  const auto ebar = enhanced_exogenous_labels(env);
  if (auto amb = detail::find_ambiguity(enc, env, ebar)) {
    std::ostringstream os;
    os << "observations " << env.label(amb->obs_first) << " and " << env.label(amb->obs_second)
       << " share exogenous state, cyclic class and learned label but differ in endogenous state";
    out.kind = OutcomeKind::Incorrect;
    out.ambiguity = amb;
    out.detail = os.str();
    return out;
  }
  out.minimal_size = minimal_size(env, threads);
  out.kind = enc.n_latent == out.minimal_size ? OutcomeKind::CorrectMinimal : OutcomeKind::CorrectNonMinimal;
  out.detail = "valid with " + std::to_string(enc.n_latent) + " latent states (minimum " +
               std::to_string(out.minimal_size) + ")";
  return out;
}

} // namespace exlab
