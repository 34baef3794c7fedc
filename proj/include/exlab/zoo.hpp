#pragma once

/// \file zoo.hpp
/// Catalog of constructed environments with their expected properties, and
/// a seeded generator of random factored environments.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "exlab/analysis.hpp"
#include "exlab/core.hpp"
#include "exlab/rng.hpp"

namespace exlab {

using ZooParams = std::map<std::string, long long>;

/// Properties a catalog entry is built to exhibit.
struct ZooExpected {
  std::optional<std::size_t> minimal_size;
  std::optional<std::size_t> diameter;
  std::optional<std::size_t> period;
  std::vector<std::string> claims;
};

struct ZooEntry {
  std::string name;
  ZooParams params;
  ExBmdp env;
  ZooExpected expected;
};

/// One catalog line: name, default parameters, a short description.
struct ZooInfo {
  std::string name;
  ZooParams defaults;
  std::string description;
};

namespace detail {

inline bool is_prime(long long v) {
  if (v < 2) return false;
  for (long long d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

inline long long param(const ZooParams& params, const std::string& key, long long fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

inline void check_prime_pair(long long p, long long q) {
  if (!is_prime(p) || !is_prime(q))
    throw Error(ErrorKind::BadParams, "p=" + std::to_string(p) + " and q=" + std::to_string(q) +
                                          " must both be prime");
  if (p >= q) throw Error(ErrorKind::BadParams, "p must be smaller than q");
}

inline void check_known_params(const ZooParams& params, const std::vector<std::string>& known,
                               const std::string& name) {
  for (const auto& [k, v] : params) {
    bool ok = false;
    for (const auto& kk : known) ok = ok || kk == k;
    if (!ok) throw Error(ErrorKind::BadParams, name + " takes no parameter '" + k + "'");
  }
}

inline std::vector<std::string> letters(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(1, static_cast<char>('a' + i));
  return out;
}

// Five-state endogenous graph with two three-step loops through state 0:
// 0 -L-> 1 -> 2 -> 0 and 0 -R-> 3 -> 4 -> 0.
inline EndogenousDynamics two_loops() {
  return EndogenousDynamics({{1, 3}, {2, 2}, {0, 0}, {4, 4}, {0, 0}}, {"L", "R"});
}

inline ExogenousChain swap_chain() { return ExogenousChain({{0.0, 1.0}, {1.0, 0.0}}); }

inline ZooEntry fig1_branching() {
  Emission em = Emission::full_exo_major(5, 2);
  em.labels = letters(10);
  ExBmdp env = compose(two_loops(), ExogenousChain({{0.25, 0.75}, {0.75, 0.25}}), em, {},
                       "fig1_branching");
  ZooExpected ex{5, 4, 3, {"ACState@K=1 merges the two branches into 3 latent states",
                           "ACDF recovers the 5 endogenous states"}};
  return {"fig1_branching", {}, std::move(env), ex};
}

inline ZooEntry fig2_chain4() {
  Emission em = Emission::full_exo_major(4, 1);
  em.labels = letters(4);
  ExBmdp env = compose(EndogenousDynamics({{1, 3}, {2, 2}, {0, 0}, {0, 0}}, {"L", "R"}),
                       ExogenousChain::trivial(), em, {}, "fig2_chain4");
  ZooExpected ex{4, 3, 1, {"W(c,d)=4", "ACState@K=3 admits a 3-state minimizer",
                           "ACState@K=4 recovers all 4 states"}};
  return {"fig2_chain4", {}, std::move(env), ex};
}

inline ZooEntry fig2_periodic5() {
  Emission em = Emission::full_exo_major(5, 1);
  em.labels = letters(5);
  ExBmdp env = compose(two_loops(), ExogenousChain::trivial(), em, {}, "fig2_periodic5");
  ZooExpected ex{5, 4, 3, {"witness distances across cyclic classes are infinite",
                           "ACState selects 3 states at every K", "ACDF@K=2 recovers 5 states"}};
  return {"fig2_periodic5", {}, std::move(env), ex};
}

inline ZooEntry prime_cycle(const ZooParams& params) {
  check_known_params(params, {"p", "q"}, "prime_cycle");
  const long long p = param(params, "p", 3), q = param(params, "q", 5);
  check_prime_pair(p, q);
  const std::size_t n = static_cast<std::size_t>(q);
  std::vector<std::vector<std::size_t>> t(n);
  t[0] = {1, static_cast<std::size_t>(q - p + 1)};
  for (std::size_t x = 1; x < n; ++x) t[x] = {(x + 1) % n, (x + 1) % n};
  Emission em = Emission::full_exo_major(n, 1);
  for (std::size_t x = 0; x < n; ++x) em.labels.push_back(std::to_string(x));
  ExBmdp env = compose(EndogenousDynamics(std::move(t), {"L", "R"}), ExogenousChain::trivial(), em,
                       {}, "prime_cycle");
  ZooExpected ex{n, n - 1, 1, {"ACState fails for small K and succeeds once K reaches the largest finite witness distance",
                               "ACDF succeeds at K=1"}};
  return {"prime_cycle", {{"p", p}, {"q", q}}, std::move(env), ex};
}

inline ZooEntry double_prime(const ZooParams& params) {
  check_known_params(params, {"p", "q"}, "double_prime");
  const long long p = param(params, "p", 3), q = param(params, "q", 5);
  check_prime_pair(p, q);
  const std::size_t n = static_cast<std::size_t>(q);
  const std::size_t jump = static_cast<std::size_t>(q - p + 1);
  // Unprimed states are 0..q-1, primed copies are q..2q-1.
  std::vector<std::vector<std::size_t>> t(2 * n);
  t[0] = {1, n + jump};
  t[n] = {n + 1, jump};
  for (std::size_t x = 1; x < n; ++x) {
    t[x] = {(x + 1) % n, (x + 1) % n};
    t[n + x] = {n + (x + 1) % n, n + (x + 1) % n};
  }
  Emission em = Emission::full_exo_major(2 * n, 1);
  for (std::size_t x = 0; x < n; ++x) em.labels.push_back(std::to_string(x));
  for (std::size_t x = 0; x < n; ++x) em.labels.push_back(std::to_string(x) + "'");
  ExBmdp env = compose(EndogenousDynamics(std::move(t), {"L", "R"}), ExogenousChain::trivial(), em,
                       {}, "double_prime");
  ZooExpected ex{2 * n, 2 * n - 1, 1, {"merging each x with x' gives deterministic latent dynamics"}};
  return {"double_prime", {{"p", p}, {"q", q}}, std::move(env), ex};
}

inline ZooEntry nonunique2x2() {
  Emission em = Emission::full_endo_major(2, 2);
  em.labels = {"a0", "a1", "b0", "b1"};
  ExBmdp env = compose(EndogenousDynamics({{0, 1}, {1, 0}}, {"Stay", "Move"}), swap_chain(), em,
                       {}, "nonunique2x2");
  ZooExpected ex{2, 1, 1, {"{a0,a1},{b0,b1} and {a0,b1},{a1,b0} are both minimal"}};
  return {"nonunique2x2", {}, std::move(env), ex};
}

inline ZooEntry periodic_coupling10() {
  Emission em;
  const std::vector<std::pair<char, std::size_t>> pairs = {{'a', 0}, {'b', 1}, {'d', 1}, {'c', 2},
                                                           {'e', 2}, {'a', 3}, {'b', 4}, {'d', 4},
                                                           {'c', 5}, {'e', 5}};
  for (const auto& [letter, e] : pairs) {
    em.domain.push_back({static_cast<std::size_t>(letter - 'a'), e});
    em.labels.push_back(std::string(1, letter) + std::to_string(e));
  }
  std::vector<double> initial(10, 0.0);
  initial[1] = 0.5; // b1
  initial[4] = 0.5; // e2
  ExBmdp env = compose(two_loops(), ExogenousChain::cycle(6), em, initial, "periodic_coupling10");
  ZooExpected ex{5, 4, 3, {"the 10 observations form a single communicating class",
                           "ACDF at K = max finite witness distance recovers 5 states"}};
  return {"periodic_coupling10", {}, std::move(env), ex};
}

inline ZooEntry fullmulti_hex() {
  // States a, b, c, a', b', c' are 0..5; action Y moves x to y' and x' to y.
  EndogenousDynamics endo({{3, 4, 5}, {3, 4, 5}, {3, 4, 5}, {0, 1, 2}, {0, 1, 2}, {0, 2, 1}},
                          {"A", "B", "C"});
  Emission em = Emission::full_exo_major(6, 1);
  em.labels = {"a", "b", "c", "a'", "b'", "c'"};
  ExBmdp env = compose(std::move(endo), ExogenousChain::trivial(), em, {}, "fullmulti_hex");
  ZooExpected ex{6, std::nullopt, 2, {"the full multistep inverse loss prefers merging {a,a'}"}};
  return {"fullmulti_hex", {}, std::move(env), ex};
}

inline ZooEntry selfedge_triangle() {
  Emission em = Emission::full_endo_major(3, 2);
  em.labels = {"a0", "a1", "b0", "b1", "c0", "c1"};
  ExBmdp env = compose(EndogenousDynamics({{2, 1}, {2, 2}, {0, 0}}, {"L", "R"}), swap_chain(), em,
                       {}, "selfedge_triangle");
  ZooExpected ex{3, 2, 1, {"imprecise-k spans favour encoders with more than 3 states"}};
  return {"selfedge_triangle", {}, std::move(env), ex};
}

} // namespace detail

/// Names, default parameters and one-line descriptions of every entry.
inline const std::vector<ZooInfo>& zoo_catalog() {
  static const std::vector<ZooInfo> catalog = {
      {"fig1_branching", {}, "two 3-step loops through s0 with a 2-state noise chain (10 observations)"},
      {"fig2_chain4", {}, "4-state chain a-L->b->c->a, a-R->d->a"},
      {"fig2_periodic5", {}, "two 3-step loops through a; period 3"},
      {"prime_cycle", {{"p", 3}, {"q", 5}}, "q-cycle with a shortcut from 0 to q-p+1"},
      {"double_prime", {{"p", 3}, {"q", 5}}, "two coupled q-cycles with cross shortcuts"},
      {"nonunique2x2", {}, "Stay/Move endogenous pair with swapping noise; two minimal encoders"},
      {"periodic_coupling10", {}, "two 3-step loops coupled to a 6-cycle noise chain on 10 pairs"},
      {"fullmulti_hex", {}, "6 states, 3 actions, alternating primed and unprimed copies"},
      {"selfedge_triangle", {}, "3-state triangle with swapping noise (6 observations)"},
  };
  return catalog;
}

/// Builds a catalog entry; unknown names raise UnknownEntry, bad parameters
/// raise BadParams.
inline ZooEntry zoo_build(const std::string& name, const ZooParams& params = {}) {
  auto fixed = [&](ZooEntry (*make)()) {
    detail::check_known_params(params, {}, name);
    return make();
  };
  if (name == "fig1_branching") return fixed(detail::fig1_branching);
  if (name == "fig2_chain4") return fixed(detail::fig2_chain4);
  if (name == "fig2_periodic5") return fixed(detail::fig2_periodic5);
  if (name == "prime_cycle") return detail::prime_cycle(params);
  if (name == "double_prime") return detail::double_prime(params);
  if (name == "nonunique2x2") return fixed(detail::nonunique2x2);
  if (name == "periodic_coupling10") return fixed(detail::periodic_coupling10);
  if (name == "fullmulti_hex") return fixed(detail::fullmulti_hex);
  if (name == "selfedge_triangle") return fixed(detail::selfedge_triangle);
  throw Error(ErrorKind::UnknownEntry, "no zoo entry named '" + name + "'");
}

/// Constraints on the endogenous table drawn by random_exbmdp.
struct RandomRequirement {
  bool irreducible = true;
  bool aperiodic = false;
  std::optional<std::size_t> period;
  std::size_t max_attempts = 100000;
};

/// Random environment: a uniformly random endogenous table (redrawn until the
/// requirement holds), exogenous rows from a flat Dirichlet, transient
/// exogenous states removed, full emission domain, uniform initial law.
inline ExBmdp random_exbmdp(std::size_t n_endo, std::size_t n_exo, std::size_t n_actions,
                            std::uint64_t seed, RandomRequirement req = {}) {
  if (n_endo == 0 || n_exo == 0 || n_actions == 0)
    throw Error(ErrorKind::BadParams, "random_exbmdp needs at least one state of each kind and one action");
  if ((req.aperiodic || req.period) && !req.irreducible)
    throw Error(ErrorKind::BadParams, "period requirements need irreducible dynamics");
  if (req.aperiodic && req.period && *req.period != 1)
    throw Error(ErrorKind::BadParams, "aperiodic contradicts period > 1");
  if (req.period && *req.period == 0) throw Error(ErrorKind::BadParams, "period must be positive");

  Rng endo_rng = Rng::stream(seed, 0);
  std::optional<EndogenousDynamics> endo;
  for (std::size_t attempt = 0; attempt < req.max_attempts && !endo; ++attempt) {
    std::vector<std::vector<std::size_t>> t(n_endo, std::vector<std::size_t>(n_actions));
    for (auto& row : t)
      for (auto& v : row) v = endo_rng.uniform_index(n_endo);
    EndogenousDynamics cand(std::move(t));
    if (req.irreducible) {
      try {
        require_irreducible(cand);
      } catch (const Error&) {
        continue;
      }
      const std::size_t per = periodicity(cand).period;
      if (req.aperiodic && per != 1) continue;
      if (req.period && per != *req.period) continue;
    }
    endo = std::move(cand);
  }
  if (!endo)
    throw Error(ErrorKind::RequirementUnsatisfiable,
                "no endogenous table met the requirement after " + std::to_string(req.max_attempts) +
                    " draws (n=" + std::to_string(n_endo) + ", actions=" + std::to_string(n_actions) + ")");

  Rng exo_rng = Rng::stream(seed, 1);
  std::vector<std::vector<double>> m(n_exo, std::vector<double>(n_exo));
  for (auto& row : m) {
    double sum = 0.0;
    for (auto& v : row) sum += (v = exo_rng.exponential());
    if (sum <= 0.0) {
      row.assign(n_exo, 1.0 / static_cast<double>(n_exo));
      continue;
    }
    for (auto& v : row) v /= sum;
  }
  // Keep only states whose reachable set can always return.
  std::vector<std::vector<char>> reach(n_exo, std::vector<char>(n_exo, 0));
  for (std::size_t i = 0; i < n_exo; ++i)
    for (std::size_t j = 0; j < n_exo; ++j) reach[i][j] = i == j || m[i][j] > 0.0;
  for (std::size_t k = 0; k < n_exo; ++k)
    for (std::size_t i = 0; i < n_exo; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n_exo; ++j)
          if (reach[k][j]) reach[i][j] = 1;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n_exo; ++i) {
    bool recurrent = true;
    for (std::size_t j = 0; j < n_exo; ++j)
      if (reach[i][j] && !reach[j][i]) recurrent = false;
    if (recurrent) keep.push_back(i);
  }
  std::vector<std::vector<double>> trimmed(keep.size(), std::vector<double>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < keep.size(); ++j) sum += (trimmed[i][j] = m[keep[i]][keep[j]]);
    for (auto& v : trimmed[i]) v /= sum;
  }

  Emission em = Emission::full_endo_major(n_endo, keep.size());
  return compose(std::move(*endo), ExogenousChain(std::move(trimmed)), std::move(em), {}, "random");
}

} // namespace exlab
