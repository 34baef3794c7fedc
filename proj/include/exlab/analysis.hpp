#pragma once

/// \file analysis.hpp
/// Graph properties of endogenous dynamics: diameter, period and cyclic
/// classes, witness distances, and the finite-witness bound 2D^2 + D.

#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "exlab/core.hpp"

namespace exlab {

/// Witness distance value; `std::nullopt` encodes Infinite.
using Witness = std::optional<std::size_t>;

/// Dense set of states.
class StateSet {
public:
  StateSet() = default;
  explicit StateSet(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  void insert(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool contains(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  bool intersects(const StateSet& o) const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & o.words_[w]) return true;
    return false;
  }
  bool empty() const {
    for (std::uint64_t w : words_)
      if (w) return false;
    return true;
  }
  std::size_t universe() const { return n_; }

  friend bool operator==(const StateSet& a, const StateSet& b) { return a.words_ == b.words_; }
  friend bool operator<(const StateSet& a, const StateSet& b) { return a.words_ < b.words_; }

private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// BFS shortest-path lengths from `source`; unreachable states get SIZE_MAX.
inline std::vector<std::size_t> bfs_distances(const EndogenousDynamics& endo, std::size_t source) {
  std::vector<std::size_t> dist(endo.n_states, SIZE_MAX);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t a = 0; a < endo.n_actions; ++a) {
      const std::size_t v = endo.next(u, a);
      if (dist[v] == SIZE_MAX) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

/// Throws NotIrreducible naming the first unreachable ordered pair.
inline void require_irreducible(const EndogenousDynamics& endo) {
  for (std::size_t a = 0; a < endo.n_states; ++a) {
    const auto dist = bfs_distances(endo, a);
    for (std::size_t b = 0; b < endo.n_states; ++b)
      if (dist[b] == SIZE_MAX) {
        std::ostringstream os;
        os << "state " << b << " is unreachable from state " << a;
        throw Error(ErrorKind::NotIrreducible, os.str());
      }
  }
}

/// Longest shortest path over ordered state pairs.
inline std::size_t diameter(const EndogenousDynamics& endo) {
  std::size_t best = 0;
  for (std::size_t a = 0; a < endo.n_states; ++a) {
    const auto dist = bfs_distances(endo, a);
    for (std::size_t b = 0; b < endo.n_states; ++b) {
      if (dist[b] == SIZE_MAX) {
        std::ostringstream os;
        os << "state " << b << " is unreachable from state " << a;
        throw Error(ErrorKind::NotIrreducible, os.str());
      }
      best = std::max(best, dist[b]);
    }
  }
  return best;
}

/// The bound 2D^2 + D on every finite witness distance.
inline std::size_t dprime_bound(std::size_t diam) { return 2 * diam * diam + diam; }

struct Periodicity {
  std::size_t period = 1;
  /// Class index of each state; state 0 is always in class 0.
  std::vector<std::size_t> cyclic_class;
};

/// Period and cyclic classes, anchored at state 0. The period is the gcd of
/// level[u] + 1 - level[v] over all edges u -> v of the BFS level function.
inline Periodicity periodicity(const EndogenousDynamics& endo) {
  require_irreducible(endo);
  const auto level = bfs_distances(endo, 0);
  std::size_t g = 0;
  for (std::size_t u = 0; u < endo.n_states; ++u)
    for (std::size_t a = 0; a < endo.n_actions; ++a) {
      const std::size_t v = endo.next(u, a);
      const long long diff = static_cast<long long>(level[u]) + 1 - static_cast<long long>(level[v]);
      g = std::gcd(g, static_cast<std::size_t>(diff < 0 ? -diff : diff));
    }
  Periodicity out;
  out.period = g == 0 ? 1 : g;
  out.cyclic_class.resize(endo.n_states);
  for (std::size_t s = 0; s < endo.n_states; ++s) out.cyclic_class[s] = level[s] % out.period;
  return out;
}

/// States with an action leading into `targets`.
inline StateSet predecessors(const EndogenousDynamics& endo, const StateSet& targets) {
  StateSet out(endo.n_states);
  for (std::size_t c = 0; c < endo.n_states; ++c)
    for (std::size_t a = 0; a < endo.n_actions; ++a)
      if (targets.contains(endo.next(c, a))) {
        out.insert(c);
        break;
      }
  return out;
}

struct WitnessOptions {
  /// Search horizon; unset means 2D^2 + D. Distances beyond it are Infinite.
  std::optional<std::size_t> cap;
};

/// Least k such that one state reaches both `a` and `b` by paths of exactly
/// k steps. Walks the sets of exactly-k predecessors of both targets; the
/// pair of sets evolves deterministically, so a repeated pair proves the
/// distance infinite even before the horizon is reached.
inline Witness witness_distance(const EndogenousDynamics& endo, std::size_t a, std::size_t b,
                                WitnessOptions options = {}) {
  if (a >= endo.n_states || b >= endo.n_states)
    throw Error(ErrorKind::BadParams, "witness query names a state out of range");
  require_irreducible(endo);
  const std::size_t horizon = options.cap ? *options.cap : dprime_bound(diameter(endo));
  StateSet ra(endo.n_states), rb(endo.n_states);
  ra.insert(a);
  rb.insert(b);
  std::set<std::pair<StateSet, StateSet>> seen;
  for (std::size_t k = 0; k <= horizon; ++k) {
    if (ra.intersects(rb)) return k;
    if (!seen.emplace(ra, rb).second) return std::nullopt;
    ra = predecessors(endo, ra);
    rb = predecessors(endo, rb);
  }
  return std::nullopt;
}

/// Symmetric matrix of witness distances for every state pair, searched up
/// to the 2D^2 + D horizon (or `options.cap`).
inline std::vector<std::vector<Witness>> witness_matrix(const EndogenousDynamics& endo,
                                                        WitnessOptions options = {}) {
  const std::size_t n = endo.n_states;
  require_irreducible(endo);
  const std::size_t horizon = options.cap ? *options.cap : dprime_bound(diameter(endo));
  std::vector<std::vector<Witness>> w(n, std::vector<Witness>(n));
  std::vector<StateSet> reach(n, StateSet(n));
  for (std::size_t s = 0; s < n; ++s) reach[s].insert(s);
  std::size_t unresolved = n * (n - 1) / 2;
  for (std::size_t s = 0; s < n; ++s) w[s][s] = 0;
  for (std::size_t k = 1; k <= horizon && unresolved > 0; ++k) {
    for (std::size_t s = 0; s < n; ++s) reach[s] = predecessors(endo, reach[s]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!w[i][j] && reach[i].intersects(reach[j])) {
          w[i][j] = w[j][i] = k;
          --unresolved;
        }
  }
  return w;
}

/// Largest finite entry of the witness matrix; 0 for a single state.
inline std::size_t max_finite_witness(const EndogenousDynamics& endo) {
  std::size_t best = 0;
  for (const auto& row : witness_matrix(endo))
    for (const Witness& v : row)
      if (v) best = std::max(best, *v);
  return best;
}

struct DPrimeReport {
  bool pass = true;
  std::size_t diameter = 0;
  std::size_t bound = 0;
  std::size_t period = 1;
  std::size_t pairs_checked = 0;
  std::optional<std::pair<std::size_t, std::size_t>> counterexample;
  std::string message;
};

/// Checks every pair: a finite distance stays within 2D^2 + D, and the
/// distance is Infinite exactly when the dynamics are periodic and the two
/// states sit in different cyclic classes. Distances are searched without a
/// horizon (repeat detection alone terminates the search), so a finite value
/// beyond the bound is reported rather than hidden.
inline DPrimeReport verify_dprime_theorem(const EndogenousDynamics& endo) {
  DPrimeReport rep;
  rep.diameter = diameter(endo);
  rep.bound = dprime_bound(rep.diameter);
  const Periodicity per = periodicity(endo);
  rep.period = per.period;
  const std::size_t unbounded = SIZE_MAX - 1;
  for (std::size_t a = 0; a < endo.n_states && rep.pass; ++a)
    for (std::size_t b = a; b < endo.n_states; ++b) {
      ++rep.pairs_checked;
      const Witness w = witness_distance(endo, a, b, {unbounded});
      const bool split = per.period > 1 && per.cyclic_class[a] != per.cyclic_class[b];
      std::ostringstream os;
      if (w && *w > rep.bound) {
        os << "W(" << a << "," << b << ") = " << *w << " exceeds " << rep.bound;
      } else if (!w && !split) {
        os << "W(" << a << "," << b << ") is infinite but the states share a cyclic class";
      } else if (w && split) {
        os << "W(" << a << "," << b << ") = " << *w << " is finite across cyclic classes";
      } else {
        continue;
      }
      rep.pass = false;
      rep.counterexample = {a, b};
      rep.message = os.str();
      break;
    }
  if (rep.pass) {
    std::ostringstream os;
    os << "all " << rep.pairs_checked << " pairs consistent (D=" << rep.diameter
       << ", bound=" << rep.bound << ", period=" << rep.period << ")";
    rep.message = os.str();
  }
  return rep;
}

struct AnalysisReport {
  std::size_t diameter = 0;
  std::size_t period = 1;
  std::vector<std::size_t> cyclic_class;
  std::vector<std::vector<Witness>> witness;
  std::size_t max_finite_witness = 0;
  std::size_t d_prime_bound = 0;
};

inline AnalysisReport analyze(const EndogenousDynamics& endo) {
  AnalysisReport r;
  r.diameter = diameter(endo);
  const Periodicity per = periodicity(endo);
  r.period = per.period;
  r.cyclic_class = per.cyclic_class;
  r.witness = witness_matrix(endo);
  for (const auto& row : r.witness)
    for (const Witness& v : row)
      if (v) r.max_finite_witness = std::max(r.max_finite_witness, *v);
  r.d_prime_bound = dprime_bound(r.diameter);
  return r;
}

/// Strongly connected components of the observation graph (an edge x -> x'
/// exists when some action gives x' positive probability), each sorted, and
/// ordered by smallest member. Every component must be closed.
inline std::vector<std::vector<std::size_t>> communicating_classes(const ExBmdp& env) {
  const std::size_t n = env.n_obs();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t src = 0; src < n; ++src) {
    std::deque<std::size_t> queue{src};
    reach[src][src] = 1;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t a = 0; a < env.n_actions(); ++a)
        for (const Transition& t : env.transitions(u, a))
          if (t.prob > 0.0 && !reach[src][t.next]) {
            reach[src][t.next] = 1;
            queue.push_back(t.next);
          }
    }
  }
  std::vector<std::vector<std::size_t>> classes;
  std::vector<char> assigned(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    if (assigned[x]) continue;
    std::vector<std::size_t> cls;
    for (std::size_t y = x; y < n; ++y)
      if (reach[x][y] && reach[y][x]) {
        cls.push_back(y);
        assigned[y] = 1;
      }
    classes.push_back(std::move(cls));
  }
  for (const auto& cls : classes) {
    std::vector<char> inside(n, 0);
    for (std::size_t x : cls) inside[x] = 1;
    for (std::size_t x : cls)
      for (std::size_t y = 0; y < n; ++y)
        if (reach[x][y] && !inside[y]) {
          std::ostringstream os;
          os << "class of observation " << env.label(x) << " leaks to " << env.label(y);
          throw Error(ErrorKind::OpenComponent, os.str());
        }
  }
  return classes;
}

} // namespace exlab
