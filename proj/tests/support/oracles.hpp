#pragma once

// Brute-force reference implementations used to check the library. Each one
// takes a different route from the code under test: Floyd-Warshall instead of
// BFS, explicit cycle enumeration instead of level gcd, forward reachability
// instead of backward pair search, the Bell triangle instead of the
// completion counts, and action-sequence enumeration with power iteration
// instead of matrix powers and a linear solve.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "exlab/exlab.hpp"

namespace oracle {

using Table = std::vector<std::vector<std::size_t>>;

inline constexpr std::size_t kUnreachable = static_cast<std::size_t>(-1) / 4;

inline std::vector<std::vector<std::size_t>> all_pairs_distances(const Table& t) {
  const std::size_t n = t.size();
  std::vector<std::vector<std::size_t>> d(n, std::vector<std::size_t>(n, kUnreachable));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (std::size_t v : t[i])
      if (v != i) d[i][v] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

inline std::size_t fw_diameter(const Table& t) {
  std::size_t best = 0;
  for (const auto& row : all_pairs_distances(t))
    for (std::size_t v : row) best = std::max(best, v);
  return best;
}

/// gcd of the lengths of all simple cycles (each enumerated from its smallest vertex).
inline std::size_t simple_cycle_period(const Table& t) {
  const std::size_t n = t.size();
  std::size_t g = 0;
  std::vector<char> on_path(n, 0);
  std::function<void(std::size_t, std::size_t, std::size_t)> dfs = [&](std::size_t root, std::size_t u,
                                                                       std::size_t len) {
    std::set<std::size_t> succ(t[u].begin(), t[u].end());
    for (std::size_t v : succ) {
      if (v == root) g = std::gcd(g, len + 1);
      else if (v > root && !on_path[v]) {
        on_path[v] = 1;
        dfs(root, v, len + 1);
        on_path[v] = 0;
      }
    }
  };
  for (std::size_t r = 0; r < n; ++r) {
    on_path[r] = 1;
    dfs(r, r, 0);
    on_path[r] = 0;
  }
  return g;
}

/// Set of states reachable from `c` in exactly k steps, by forward expansion.
inline std::vector<char> reach_exactly(const Table& t, std::size_t c, std::size_t k) {
  std::vector<char> cur(t.size(), 0);
  cur[c] = 1;
  for (std::size_t step = 0; step < k; ++step) {
    std::vector<char> nxt(t.size(), 0);
    for (std::size_t u = 0; u < t.size(); ++u)
      if (cur[u])
        for (std::size_t v : t[u]) nxt[v] = 1;
    cur = std::move(nxt);
  }
  return cur;
}

/// Smallest k <= cap such that some state reaches both a and b in exactly k steps.
inline std::optional<std::size_t> brute_witness(const Table& t, std::size_t a, std::size_t b, std::size_t cap) {
  const std::size_t n = t.size();
  std::vector<std::vector<char>> reach(n);
  for (std::size_t c = 0; c < n; ++c) {
    reach[c].assign(n, 0);
    reach[c][c] = 1;
  }
  for (std::size_t k = 0; k <= cap; ++k) {
    for (std::size_t c = 0; c < n; ++c)
      if (reach[c][a] && reach[c][b]) return k;
    for (std::size_t c = 0; c < n; ++c) {
      std::vector<char> nxt(n, 0);
      for (std::size_t u = 0; u < n; ++u)
        if (reach[c][u])
          for (std::size_t v : t[u]) nxt[v] = 1;
      reach[c] = std::move(nxt);
    }
  }
  return std::nullopt;
}

/// Bell numbers from the Bell triangle.
inline std::vector<std::uint64_t> bell_triangle(std::size_t n_max) {
  std::vector<std::uint64_t> bells{1};
  std::vector<std::uint64_t> row{1};
  for (std::size_t i = 1; i <= n_max; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    bells.push_back(next.front());
    row = std::move(next);
  }
  return bells;
}

/// Dense step matrix P_a as nested vectors.
inline std::vector<std::vector<double>> step_matrix(const exlab::ExBmdp& env, std::size_t a) {
  const std::size_t n = env.n_obs();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) m[x][y] = env.prob(x, a, y);
  return m;
}

inline std::vector<double> push(const std::vector<double>& v, const std::vector<std::vector<double>>& m) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t x = 0; x < v.size(); ++x)
    if (v[x] != 0.0)
      for (std::size_t y = 0; y < v.size(); ++y) out[y] += v[x] * m[x][y];
  return out;
}

/// Time-averaged occupancy of the uniform-action chain from the uniform
/// start: a long burn-in followed by an average over a window that every
/// period up to 12 divides.
inline std::vector<double> cesaro_occupancy(const exlab::ExBmdp& env) {
  const std::size_t n = env.n_obs(), na = env.n_actions();
  std::vector<std::vector<double>> mean(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < na; ++a) {
    const auto m = step_matrix(env, a);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) mean[x][y] += m[x][y] / static_cast<double>(na);
  }
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  for (int i = 0; i < 4000; ++i) v = push(v, mean);
  const std::size_t window = 27720;
  std::vector<double> acc(n, 0.0);
  for (std::size_t i = 0; i < window; ++i) {
    for (std::size_t x = 0; x < n; ++x) acc[x] += v[x];
    v = push(v, mean);
  }
  for (double& a : acc) a /= static_cast<double>(window);
  return acc;
}

/// Long-run probability of every (x, action sequence of length k, y):
/// occupancy of x times A^-k times the probability of ending at y.
struct PathJoint {
  std::size_t k = 0;
  std::vector<double> occupancy;
  /// weight[x][seq code][y]; seq code is base-A with the first action most significant.
  std::vector<std::vector<std::vector<double>>> weight;
};

inline PathJoint path_joint(const exlab::ExBmdp& env, std::size_t k, const std::vector<double>& occ) {
  const std::size_t n = env.n_obs(), na = env.n_actions();
  std::vector<std::vector<std::vector<double>>> steps;
  for (std::size_t a = 0; a < na; ++a) steps.push_back(step_matrix(env, a));
  std::size_t n_seq = 1;
  for (std::size_t i = 0; i < k; ++i) n_seq *= na;
  PathJoint pj;
  pj.k = k;
  pj.occupancy = occ;
  pj.weight.assign(n, std::vector<std::vector<double>>(n_seq, std::vector<double>(n, 0.0)));
  for (std::size_t x = 0; x < n; ++x) {
    if (occ[x] == 0.0) continue;
    for (std::size_t code = 0; code < n_seq; ++code) {
      std::vector<std::size_t> seq(k);
      std::size_t c = code;
      for (std::size_t i = k; i-- > 0;) {
        seq[i] = c % na;
        c /= na;
      }
      std::vector<double> v(n, 0.0);
      v[x] = 1.0;
      for (std::size_t a : seq) v = push(v, steps[a]);
      const double w = occ[x] * std::pow(1.0 / static_cast<double>(na), static_cast<double>(k));
      for (std::size_t y = 0; y < n; ++y) pj.weight[x][code][y] = w * v[y];
    }
  }
  return pj;
}

/// Expected negative log-likelihood of the Bayes-optimal predictor of
/// `target` given `context`, both functions of (x, action sequence, y).
template <class Ctx, class Target>
double conditional_entropy(const PathJoint& pj, std::size_t na, Ctx context, Target target) {
  std::map<std::vector<std::size_t>, std::map<std::size_t, double>> table;
  std::size_t n_seq = pj.weight.empty() ? 0 : pj.weight[0].size();
  for (std::size_t x = 0; x < pj.weight.size(); ++x)
    for (std::size_t code = 0; code < n_seq; ++code) {
      std::vector<std::size_t> seq(pj.k);
      std::size_t c = code;
      for (std::size_t i = pj.k; i-- > 0;) {
        seq[i] = c % na;
        c /= na;
      }
      for (std::size_t y = 0; y < pj.weight[x][code].size(); ++y) {
        const double w = pj.weight[x][code][y];
        if (w == 0.0) continue;
        table[context(x, seq, y)][target(x, seq, y)] += w;
      }
    }
  double loss = 0.0;
  for (const auto& [ctx, row] : table) {
    double total = 0.0;
    for (const auto& [t, w] : row) total += w;
    for (const auto& [t, w] : row) loss -= w * std::log(w / total);
  }
  return loss;
}

/// Population loss of `enc` under `config`, by explicit path enumeration.
inline double exact_loss_by_paths(const exlab::Encoder& enc, const exlab::ExBmdp& env,
                                  const exlab::LossConfig& config) {
  using exlab::LossVariant;
  const std::size_t na = env.n_actions();
  const std::size_t K = config.K;
  const auto occ = cesaro_occupancy(env);
  const auto phi = [&](std::size_t x) { return static_cast<std::size_t>(enc[x]); };
  double loss = 0.0;
  if (config.variant == LossVariant::ImpreciseK) {
    // label l pools spans of every true length k <= l, each spread evenly over {k..K}
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::vector<double>> counts;
    for (std::size_t k = 1; k <= K; ++k) {
      const PathJoint pj = path_joint(env, k, occ);
      const double spread = 1.0 / static_cast<double>(K - k + 1);
      for (std::size_t x = 0; x < pj.weight.size(); ++x)
        for (std::size_t code = 0; code < pj.weight[x].size(); ++code) {
          std::size_t first = code;
          for (std::size_t i = 1; i < k; ++i) first /= na;
          for (std::size_t y = 0; y < pj.weight[x][code].size(); ++y) {
            const double w = pj.weight[x][code][y];
            if (w == 0.0) continue;
            for (std::size_t l = k; l <= K; ++l) {
              auto& row = counts[{l, phi(x), phi(y)}];
              if (row.empty()) row.assign(na, 0.0);
              row[first] += w * spread;
            }
          }
        }
    }
    for (const auto& [key, row] : counts) {
      double total = 0.0;
      for (double w : row) total += w;
      for (double w : row)
        if (w > 0.0) loss -= w * std::log(w / total);
    }
    return loss / static_cast<double>(K);
  }
  for (std::size_t k = 1; k <= K; ++k) {
    const PathJoint pj = path_joint(env, k, occ);
    if (config.variant == LossVariant::FullMulti) {
      double term = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        term += conditional_entropy(
            pj, na,
            [&](std::size_t x, const std::vector<std::size_t>& seq, std::size_t y) {
              std::vector<std::size_t> ctx{phi(x), phi(y)};
              ctx.insert(ctx.end(), seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(j));
              return ctx;
            },
            [&](std::size_t, const std::vector<std::size_t>& seq, std::size_t) { return seq[j]; });
      }
      loss += term / static_cast<double>(k);
    } else {
      loss += conditional_entropy(
          pj, na,
          [&](std::size_t x, const std::vector<std::size_t>&, std::size_t y) {
            return std::vector<std::size_t>{phi(x), phi(y)};
          },
          [](std::size_t, const std::vector<std::size_t>& seq, std::size_t) { return seq[0]; });
    }
  }
  loss /= static_cast<double>(K);
  if (config.variant == LossVariant::ACDF) {
    const PathJoint pj = path_joint(env, 1, occ);
    loss += conditional_entropy(
        pj, na,
        [&](std::size_t x, const std::vector<std::size_t>& seq, std::size_t) {
          return std::vector<std::size_t>{phi(x), seq[0]};
        },
        [&](std::size_t, const std::vector<std::size_t>&, std::size_t y) { return phi(y); });
  }
  return loss;
}

} // namespace oracle
