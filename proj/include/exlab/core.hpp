#pragma once

/// \file core.hpp
/// Factored environment model: a deterministic endogenous table, an
/// action-independent exogenous Markov chain, a bijective emission from a
/// subset of (endogenous, exogenous) pairs onto dense observation indices, and
/// the observation-level MDP composed from them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "exlab/error.hpp"

namespace exlab {

/// Absolute tolerance for every probability-sum comparison.
inline constexpr double kProbTolerance = 1e-12;

/// Deterministic controllable dynamics: `table[s][a]` is the successor state.
struct EndogenousDynamics {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<std::vector<std::size_t>> table;
  std::vector<std::string> action_names;

  EndogenousDynamics() = default;

  /// Builds and validates. Missing action names become "0", "1", ...
  EndogenousDynamics(std::vector<std::vector<std::size_t>> tbl,
                     std::vector<std::string> names = {})
      : table(std::move(tbl)), action_names(std::move(names)) {
    n_states = table.size();
    if (n_states == 0) throw Error(ErrorKind::InvalidDynamics, "no endogenous states");
    n_actions = table.front().size();
    if (n_actions == 0) throw Error(ErrorKind::InvalidDynamics, "no actions");
    for (std::size_t s = 0; s < n_states; ++s) {
      if (table[s].size() != n_actions) {
        std::ostringstream os;
        os << "row " << s << " has " << table[s].size() << " entries, expected " << n_actions;
        throw Error(ErrorKind::InvalidDynamics, os.str());
      }
      for (std::size_t a = 0; a < n_actions; ++a) {
        if (table[s][a] >= n_states) {
          std::ostringstream os;
          os << "T(" << s << "," << a << ") = " << table[s][a] << " is out of range";
          throw Error(ErrorKind::InvalidDynamics, os.str());
        }
      }
    }
    if (action_names.empty()) {
      for (std::size_t a = 0; a < n_actions; ++a) action_names.push_back(std::to_string(a));
    } else if (action_names.size() != n_actions) {
      throw Error(ErrorKind::InvalidDynamics, "action name count does not match table width");
    }
  }

  std::size_t next(std::size_t s, std::size_t a) const { return table[s][a]; }

  /// Successor lists with duplicates removed, ordered ascending.
  std::vector<std::vector<std::size_t>> successors() const {
    std::vector<std::vector<std::size_t>> out(n_states);
    for (std::size_t s = 0; s < n_states; ++s) {
      out[s] = table[s];
      std::sort(out[s].begin(), out[s].end());
      out[s].erase(std::unique(out[s].begin(), out[s].end()), out[s].end());
    }
    return out;
  }
};

/// Action-independent noise chain with a row-stochastic matrix.
struct ExogenousChain {
  std::size_t n_states = 0;
  std::vector<std::vector<double>> matrix;

  ExogenousChain() = default;

  explicit ExogenousChain(std::vector<std::vector<double>> m) : matrix(std::move(m)) {
    n_states = matrix.size();
    if (n_states == 0) throw Error(ErrorKind::InvalidExogenous, "no exogenous states");
    for (std::size_t e = 0; e < n_states; ++e) {
      if (matrix[e].size() != n_states) {
        std::ostringstream os;
        os << "exogenous row " << e << " has " << matrix[e].size() << " entries, expected "
           << n_states;
        throw Error(ErrorKind::InvalidExogenous, os.str());
      }
      double sum = 0.0;
      for (double p : matrix[e]) {
        if (!(p >= 0.0 && p <= 1.0)) {
          std::ostringstream os;
          os << "exogenous row " << e << " has entry " << p << " outside [0,1]";
          throw Error(ErrorKind::NonStochasticRow, os.str());
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kProbTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "exogenous row " << e << " sums to " << sum;
        throw Error(ErrorKind::NonStochasticRow, os.str());
      }
    }
    check_no_transient();
  }

  static ExogenousChain trivial() { return ExogenousChain(std::vector<std::vector<double>>{{1.0}}); }

  /// Deterministic cyclic shift e -> (e+1) mod n.
  static ExogenousChain cycle(std::size_t n) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t e = 0; e < n; ++e) m[e][(e + 1) % n] = 1.0;
    return ExogenousChain(std::move(m));
  }

private:
  // Every state must be able to return to itself from wherever it can go:
  // reachability must be symmetric.
  void check_no_transient() const {
    const std::size_t n = n_states;
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
      reach[i][i] = 1;
      for (std::size_t j = 0; j < n; ++j)
        if (matrix[i][j] > 0.0) reach[i][j] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (reach[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (reach[k][j]) reach[i][j] = 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][j] && !reach[j][i]) {
          std::ostringstream os;
          os << "exogenous state " << i << " is transient (reaches " << j
             << " without return)";
          throw Error(ErrorKind::InvalidExogenous, os.str());
        }
  }
};

/// One (endogenous, exogenous) pair of the emission domain.
struct LatentPair {
  std::size_t s = 0;
  std::size_t e = 0;
  friend bool operator==(const LatentPair&, const LatentPair&) = default;
  friend auto operator<=>(const LatentPair&, const LatentPair&) = default;
};

/// Bijection between the emission domain and observation indices
/// 0..n_obs-1. Observation i is `domain[i]`.
struct Emission {
  std::vector<LatentPair> domain;
  std::vector<std::string> labels;

  std::size_t size() const { return domain.size(); }

  /// Observation index of (s,e), if the pair is in the domain.
  std::optional<std::size_t> find(std::size_t s, std::size_t e) const {
    for (std::size_t i = 0; i < domain.size(); ++i)
      if (domain[i].s == s && domain[i].e == e) return i;
    return std::nullopt;
  }

  /// Full domain S x E in exogenous-major order: observation s + e*|S|.
  static Emission full_exo_major(std::size_t n_endo, std::size_t n_exo) {
    Emission em;
    for (std::size_t e = 0; e < n_exo; ++e)
      for (std::size_t s = 0; s < n_endo; ++s) em.domain.push_back({s, e});
    return em;
  }

  /// Full domain S x E in endogenous-major order: observation s*|E| + e.
  static Emission full_endo_major(std::size_t n_endo, std::size_t n_exo) {
    Emission em;
    for (std::size_t s = 0; s < n_endo; ++s)
      for (std::size_t e = 0; e < n_exo; ++e) em.domain.push_back({s, e});
    return em;
  }
};

/// One outgoing edge of the composed observation MDP.
struct Transition {
  std::size_t next = 0;
  double prob = 0.0;
};

/// A partition of the observations in restricted-growth canonical form.
struct Encoder {
  std::vector<std::uint32_t> assignment;
  std::uint32_t n_latent = 0;

  Encoder() = default;

  /// Relabels arbitrary labels into canonical form (first-occurrence order).
  template <class Int>
  static Encoder canonical(const std::vector<Int>& labels) {
    Encoder enc;
    enc.assignment.reserve(labels.size());
    std::map<Int, std::uint32_t> relabel;
    for (const Int& l : labels) {
      auto it = relabel.find(l);
      if (it == relabel.end()) it = relabel.emplace(l, static_cast<std::uint32_t>(relabel.size())).first;
      enc.assignment.push_back(it->second);
    }
    enc.n_latent = static_cast<std::uint32_t>(relabel.size());
    return enc;
  }

  /// Parses "0,1,1,2" or "0112" (single-digit labels only in the compact form).
  static Encoder parse(const std::string& text) {
    std::vector<long> labels;
    if (text.find(',') != std::string::npos || text.find(' ') != std::string::npos) {
      std::string cleaned = text;
      std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
      std::istringstream is(cleaned);
      std::string tok;
      while (is >> tok) {
        try {
          labels.push_back(std::stol(tok));
        } catch (const std::exception&) {
          throw Error(ErrorKind::InvalidEncoder, "bad encoder label '" + tok + "'");
        }
      }
    } else {
      for (char c : text) {
        if (c < '0' || c > '9')
          throw Error(ErrorKind::InvalidEncoder, std::string("bad encoder character '") + c + "'");
        labels.push_back(c - '0');
      }
    }
    if (labels.empty()) throw Error(ErrorKind::InvalidEncoder, "empty encoder");
    return canonical(labels);
  }

  static Encoder trivial(std::size_t n) {
    Encoder enc;
    for (std::size_t i = 0; i < n; ++i) enc.assignment.push_back(static_cast<std::uint32_t>(i));
    enc.n_latent = static_cast<std::uint32_t>(n);
    return enc;
  }

  static Encoder all_in_one(std::size_t n) {
    Encoder enc;
    enc.assignment.assign(n, 0);
    enc.n_latent = n > 0 ? 1 : 0;
    return enc;
  }

  std::size_t size() const { return assignment.size(); }
  std::uint32_t operator[](std::size_t x) const { return assignment[x]; }

  bool is_canonical() const {
    std::uint32_t next = 0;
    for (std::uint32_t l : assignment) {
      if (l > next) return false;
      if (l == next) ++next;
    }
    return next == n_latent;
  }

  /// Compact text form; labels above 9 force the comma-separated form.
  std::string to_string() const {
    std::ostringstream os;
    const bool compact = n_latent <= 10;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (!compact && i > 0) os << ',';
      os << assignment[i];
    }
    return os.str();
  }

  /// Blocks of observations, in label order.
  std::vector<std::vector<std::size_t>> blocks() const {
    std::vector<std::vector<std::size_t>> out(n_latent);
    for (std::size_t x = 0; x < assignment.size(); ++x) out[assignment[x]].push_back(x);
    return out;
  }

  friend bool operator==(const Encoder& a, const Encoder& b) { return a.assignment == b.assignment; }
  friend bool operator<(const Encoder& a, const Encoder& b) { return a.assignment < b.assignment; }
};

/// The composed environment. Immutable after construction.
class ExBmdp {
public:
  ExBmdp() = default;

  ExBmdp(std::string name, EndogenousDynamics endo, ExogenousChain exo, Emission emission,
         std::vector<double> initial)
      : name_(std::move(name)),
        endo_(std::move(endo)),
        exo_(std::move(exo)),
        emission_(std::move(emission)),
        initial_(std::move(initial)) {
    build();
  }

  const std::string& name() const { return name_; }
  const EndogenousDynamics& endo() const { return endo_; }
  const ExogenousChain& exo() const { return exo_; }
  const Emission& emission() const { return emission_; }
  const std::vector<double>& initial() const { return initial_; }

  std::size_t n_obs() const { return emission_.size(); }
  std::size_t n_actions() const { return endo_.n_actions; }
  const std::string& label(std::size_t x) const { return emission_.labels[x]; }

  /// Observation index for a label, if any.
  std::optional<std::size_t> find_label(const std::string& lbl) const {
    for (std::size_t x = 0; x < emission_.labels.size(); ++x)
      if (emission_.labels[x] == lbl) return x;
    return std::nullopt;
  }

  /// Ground-truth endogenous state of observation x.
  std::size_t endo_state(std::size_t x) const { return emission_.domain[x].s; }
  /// Ground-truth exogenous state of observation x.
  std::size_t exo_state(std::size_t x) const { return emission_.domain[x].e; }

  /// Ground-truth endogenous encoder, canonicalized.
  Encoder endo_encoder() const {
    std::vector<std::size_t> l(n_obs());
    for (std::size_t x = 0; x < n_obs(); ++x) l[x] = endo_state(x);
    return Encoder::canonical(l);
  }

  /// Outgoing edges of (x, a), sorted by successor index.
  const std::vector<Transition>& transitions(std::size_t x, std::size_t a) const {
    return edges_[x * endo_.n_actions + a];
  }

  /// P(x' | x, a).
  double prob(std::size_t x, std::size_t a, std::size_t x_next) const {
    for (const Transition& t : transitions(x, a))
      if (t.next == x_next) return t.prob;
    return 0.0;
  }

  /// Dense action-conditional matrix, row-major n_obs x n_obs.
  std::vector<double> dense(std::size_t a) const {
    const std::size_t n = n_obs();
    std::vector<double> m(n * n, 0.0);
    for (std::size_t x = 0; x < n; ++x)
      for (const Transition& t : transitions(x, a)) m[x * n + t.next] += t.prob;
    return m;
  }

  /// Stable text key identifying the composed model; used for memoization.
  std::string fingerprint() const {
    std::ostringstream os;
    os.precision(17);
    os << n_obs() << ':' << n_actions() << ';';
    for (std::size_t x = 0; x < n_obs(); ++x) {
      os << emission_.domain[x].s << ',' << emission_.domain[x].e << '|';
      for (std::size_t a = 0; a < n_actions(); ++a) {
        for (const Transition& t : transitions(x, a)) os << t.next << '@' << t.prob << ' ';
        os << '/';
      }
    }
    return os.str();
  }

private:
  void build() {
    const std::size_t n = emission_.size();
    if (n == 0) throw Error(ErrorKind::EmissionNotClosed, "emission domain is empty");
    std::map<LatentPair, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) {
      const LatentPair& p = emission_.domain[i];
      if (p.s >= endo_.n_states || p.e >= exo_.n_states) {
        std::ostringstream os;
        os << "emission entry " << i << " (s=" << p.s << ", e=" << p.e << ") is out of range";
        throw Error(ErrorKind::EmissionNotClosed, os.str());
      }
      if (!index.emplace(p, i).second) {
        std::ostringstream os;
        os << "emission pair (s=" << p.s << ", e=" << p.e << ") appears twice";
        throw Error(ErrorKind::EmissionNotClosed, os.str());
      }
    }
    if (emission_.labels.empty()) {
      for (std::size_t i = 0; i < n; ++i)
        emission_.labels.push_back("s" + std::to_string(emission_.domain[i].s) + "e" +
                                   std::to_string(emission_.domain[i].e));
    } else if (emission_.labels.size() != n) {
      throw Error(ErrorKind::SchemaError, "label count does not match emission domain");
    }

    const std::size_t na = endo_.n_actions;
    edges_.assign(n * na, {});
    for (std::size_t x = 0; x < n; ++x) {
      const LatentPair p = emission_.domain[x];
      for (std::size_t a = 0; a < na; ++a) {
        std::vector<Transition>& out = edges_[x * na + a];
        const std::size_t s2 = endo_.next(p.s, a);
        double sum = 0.0;
        for (std::size_t e2 = 0; e2 < exo_.n_states; ++e2) {
          const double pr = exo_.matrix[p.e][e2];
          if (pr <= 0.0) continue;
          auto it = index.find({s2, e2});
          if (it == index.end()) {
            std::ostringstream os;
            os << "(s=" << p.s << ", e=" << p.e << ", a=" << a << ", e'=" << e2
               << ") leads to (s=" << s2 << ", e=" << e2 << ") outside the domain";
            throw Error(ErrorKind::EmissionNotClosed, os.str());
          }
          out.push_back({it->second, pr});
          sum += pr;
        }
        std::sort(out.begin(), out.end(),
                  [](const Transition& l, const Transition& r) { return l.next < r.next; });
        if (std::abs(sum - 1.0) > kProbTolerance) {
          std::ostringstream os;
          os << "composed row (x=" << x << ", a=" << a << ") sums to " << sum;
          throw Error(ErrorKind::NonStochasticRow, os.str());
        }
      }
    }

    if (initial_.size() != n) {
      std::ostringstream os;
      os << "initial distribution has " << initial_.size() << " entries for " << n
         << " observations";
      throw Error(ErrorKind::InitialOffSupport, os.str());
    }
    double total = 0.0;
    for (double p : initial_) {
      if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorKind::NonStochasticRow, "initial distribution has an entry outside [0,1]");
      total += p;
    }
    if (std::abs(total - 1.0) > kProbTolerance) {
      std::ostringstream os;
      os << "initial distribution sums to " << total;
      throw Error(ErrorKind::NonStochasticRow, os.str());
    }
  }

  std::string name_;
  EndogenousDynamics endo_;
  ExogenousChain exo_;
  Emission emission_;
  std::vector<double> initial_;
  std::vector<std::vector<Transition>> edges_;
};

/// Composes the observation MDP. An empty `initial` means uniform over
/// observations.
inline ExBmdp compose(EndogenousDynamics endo, ExogenousChain exo, Emission emission,
                      std::vector<double> initial = {}, std::string name = "env") {
  if (initial.empty()) initial.assign(emission.size(), emission.size() ? 1.0 / emission.size() : 0.0);
  return ExBmdp(std::move(name), std::move(endo), std::move(exo), std::move(emission),
                std::move(initial));
}

} // namespace exlab
