#pragma once

/// \file statistics.hpp
/// Observation-level span statistics. Each loss term is a "component": a
/// table of fitting weights (train counts, or exact probabilities) and a
/// table of scoring weights (validation counts scaled so that the term equals
/// the sum of weight times negative log-probability). Encoders only relabel
/// the observation axes, so every encoder is scored from the same tables.

#include <Eigen/Dense>

#include <cmath>
#include <compare>
#include <map>
#include <set>
#include <vector>

#include "exlab/analysis.hpp"
#include "exlab/learning/config.hpp"
#include "exlab/rng.hpp"
#include "exlab/sampling.hpp"

namespace exlab {

enum class ComponentKind {
  /// Predict a_t from (phi(x_t), phi(x_{t+k})): one inverse term at span length k.
  Inverse,
  /// Predict phi(x_{t+1}) from (phi(x_t), a_t).
  Forward,
  /// Predict every a_{t+j}, j < k, from (phi(x_t), phi(x_{t+k}), a_t..a_{t+j-1}).
  FullMulti,
  /// Inverse terms for k = 1..K where each span's length label is redrawn
  /// uniformly from {k..K}; `k` holds K.
  Imprecise,
};

struct ComponentKey {
  ComponentKind kind = ComponentKind::Inverse;
  std::size_t k = 1;
  friend auto operator<=>(const ComponentKey&, const ComponentKey&) = default;
};

/// One weighted cell: context, action, first and last observation.
struct Cell {
  std::uint32_t ctx = 0;
  std::uint32_t action = 0;
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  double w = 0.0;
};

struct Component {
  ComponentKey key;
  std::size_t contexts = 1;
  std::vector<Cell> fit;
  std::vector<Cell> score;
};

/// A loss as a weighted sum of components.
struct Objective {
  LossConfig config;
  std::vector<std::pair<std::size_t, double>> terms;
};

/// Components needed by a set of loss configurations, and each loss
/// expressed over them.
struct ObjectivePlan {
  std::vector<ComponentKey> components;
  std::vector<Objective> objectives;
  std::size_t k_max = 1;
};

/// Inverse-type losses weigh each span length equally: ACState at K is the
/// mean of the K per-length terms, ACDF adds the forward term, FullMulti at K
/// is the mean of its K per-length terms.
inline ObjectivePlan plan_objectives(const std::vector<LossConfig>& configs) {
  std::set<ComponentKey> keys;
  ObjectivePlan plan;
  for (const auto& c : configs) {
    c.validate();
    plan.k_max = std::max(plan.k_max, c.K);
    switch (c.variant) {
      case LossVariant::ACDF: keys.insert({ComponentKind::Forward, 1}); [[fallthrough]];
      case LossVariant::ACState:
        for (std::size_t k = 1; k <= c.K; ++k) keys.insert({ComponentKind::Inverse, k});
        break;
      case LossVariant::FullMulti:
        for (std::size_t k = 1; k <= c.K; ++k) keys.insert({ComponentKind::FullMulti, k});
        break;
      case LossVariant::ImpreciseK: keys.insert({ComponentKind::Imprecise, c.K}); break;
    }
  }
  plan.components.assign(keys.begin(), keys.end());
  auto index = [&](ComponentKey key) {
    return static_cast<std::size_t>(std::lower_bound(plan.components.begin(), plan.components.end(), key) -
                                    plan.components.begin());
  };
  for (const auto& c : configs) {
    Objective obj;
    obj.config = c;
    const double per_k = 1.0 / static_cast<double>(c.K);
    switch (c.variant) {
      case LossVariant::ACState:
      case LossVariant::ACDF:
        for (std::size_t k = 1; k <= c.K; ++k) obj.terms.push_back({index({ComponentKind::Inverse, k}), per_k});
        if (c.variant == LossVariant::ACDF) obj.terms.push_back({index({ComponentKind::Forward, 1}), 1.0});
        break;
      case LossVariant::FullMulti:
        for (std::size_t k = 1; k <= c.K; ++k) obj.terms.push_back({index({ComponentKind::FullMulti, k}), per_k});
        break;
      case LossVariant::ImpreciseK: obj.terms.push_back({index({ComponentKind::Imprecise, c.K}), 1.0}); break;
    }
    plan.objectives.push_back(std::move(obj));
  }
  return plan;
}

/// Length label of the span (trajectory, t, k) under the imprecise-k scheme:
/// uniform on {k..K}, drawn from a counter keyed by the dataset seed.
inline std::size_t imprecise_label(std::uint64_t seed, std::size_t traj, std::size_t t, std::size_t k,
                                   std::size_t K) {
  return k + static_cast<std::size_t>(bounded(keyed_draw(seed, traj, t, k), K - k + 1));
}

namespace detail {

inline std::size_t ipow(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= base;
  return r;
}

/// Context offsets for FullMulti at span length k: the block for prefix
/// length j starts at sum_{i<j} A^i.
inline std::vector<std::size_t> prefix_offsets(std::size_t n_actions, std::size_t k) {
  std::vector<std::size_t> off(k + 1, 0);
  for (std::size_t j = 0; j < k; ++j) off[j + 1] = off[j] + ipow(n_actions, j);
  return off;
}

inline std::size_t contexts_for(ComponentKey key, std::size_t n_actions) {
  switch (key.kind) {
    case ComponentKind::Inverse:
    case ComponentKind::Forward: return 1;
    case ComponentKind::FullMulti: return prefix_offsets(n_actions, key.k).back();
    case ComponentKind::Imprecise: return key.k;
  }
  return 1;
}

/// Dense accumulator over (ctx, action, x, y) flattened to cells.
class DenseTable {
public:
  DenseTable(std::size_t contexts, std::size_t n_actions, std::size_t n_obs)
      : a_(n_actions), n_(n_obs), data_(contexts * n_actions * n_obs * n_obs, 0.0) {}

  void add(std::size_t ctx, std::size_t a, std::size_t x, std::size_t y, double w) {
    data_[((ctx * a_ + a) * n_ + x) * n_ + y] += w;
  }

  std::vector<Cell> cells(double scale) const {
    std::vector<Cell> out;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (data_[i] == 0.0) continue;
      std::size_t r = i;
      const auto y = static_cast<std::uint32_t>(r % n_); r /= n_;
      const auto x = static_cast<std::uint32_t>(r % n_); r /= n_;
      const auto a = static_cast<std::uint32_t>(r % a_); r /= a_;
      out.push_back({static_cast<std::uint32_t>(r), a, x, y, data_[i] * scale});
    }
    return out;
  }

private:
  std::size_t a_, n_;
  std::vector<double> data_;
};

/// Accumulates one dataset's spans into the table of `key`.
inline void accumulate_spans(DenseTable& table, ComponentKey key, const SpanIndex& idx, std::size_t n_actions) {
  const TrajectoryDataset& ds = *idx.data;
  const auto offsets = key.kind == ComponentKind::FullMulti ? prefix_offsets(n_actions, key.k)
                                                            : std::vector<std::size_t>{};
  for (std::size_t i = 0; i < ds.trajectories.size(); ++i) {
    const Trajectory& tr = ds.trajectories[i];
    for (std::size_t t = 0; t < idx.anchors[i]; ++t) {
      const std::size_t x = tr.obs[t], a = tr.actions[t];
      switch (key.kind) {
        case ComponentKind::Inverse: table.add(0, a, x, tr.obs[t + key.k], 1.0); break;
        case ComponentKind::Forward: table.add(0, a, x, tr.obs[t + 1], 1.0); break;
        case ComponentKind::FullMulti: {
          const std::size_t y = tr.obs[t + key.k];
          std::size_t code = 0;
          for (std::size_t j = 0; j < key.k; ++j) {
            table.add(offsets[j] + code, tr.actions[t + j], x, y, 1.0);
            code = code * n_actions + tr.actions[t + j];
          }
          break;
        }
        case ComponentKind::Imprecise:
          for (std::size_t k = 1; k <= key.k; ++k) {
            const std::size_t label = imprecise_label(ds.seed, i, t, k, key.k);
            table.add(label - 1, a, x, tr.obs[t + k], 1.0);
          }
          break;
      }
    }
  }
}

/// Scale turning summed validation cells into the component's loss.
inline double score_scale(ComponentKey key, std::size_t n_spans) {
  const double n = static_cast<double>(n_spans);
  switch (key.kind) {
    case ComponentKind::Inverse:
    case ComponentKind::Forward: return 1.0 / n;
    case ComponentKind::FullMulti:
    case ComponentKind::Imprecise: return 1.0 / (static_cast<double>(key.k) * n);
  }
  return 1.0 / n;
}

} // namespace detail

/// Components estimated from data: `train` supplies fitting counts,
/// `validation` supplies scoring weights. Both use anchors for `k_max`.
inline std::vector<Component> sampled_components(const std::vector<ComponentKey>& keys, const TrajectoryDataset& train,
                                                 const TrajectoryDataset& validation, std::size_t k_max,
                                                 std::size_t n_obs, std::size_t n_actions) {
  for (const auto& key : keys)
    if (key.k > k_max) throw Error(ErrorKind::ConfigMismatch, "span length exceeds K_max");
  const SpanIndex tr_idx = span_index(train, k_max);
  const SpanIndex va_idx = span_index(validation, k_max);
  std::vector<Component> out;
  for (const auto& key : keys) {
    Component c;
    c.key = key;
    c.contexts = detail::contexts_for(key, n_actions);
    detail::DenseTable fit(c.contexts, n_actions, n_obs), score(c.contexts, n_actions, n_obs);
    detail::accumulate_spans(fit, key, tr_idx, n_actions);
    detail::accumulate_spans(score, key, va_idx, n_actions);
    c.fit = fit.cells(1.0);
    c.score = score.cells(detail::score_scale(key, va_idx.total_anchors()));
    out.push_back(std::move(c));
  }
  return out;
}

/// Long-run occupancy of the uniform-action chain started from the uniform
/// distribution over observations: each closed class keeps its share of the
/// start mass and spreads it by its own stationary law.
inline Eigen::VectorXd long_run_occupancy(const ExBmdp& env) {
  const std::size_t n = env.n_obs();
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < env.n_actions(); ++a)
    for (std::size_t x = 0; x < n; ++x)
      for (const Transition& t : env.transitions(x, a))
        mean(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(t.next)) +=
            t.prob / static_cast<double>(env.n_actions());
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (const auto& cls : communicating_classes(env)) {
    const auto m = static_cast<Eigen::Index>(cls.size());
    Eigen::MatrixXd sys(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        sys(j, i) = mean(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(i)]),
                         static_cast<Eigen::Index>(cls[static_cast<std::size_t>(j)])) -
                    (i == j ? 1.0 : 0.0);
    sys.row(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    const Eigen::VectorXd pi = sys.fullPivLu().solve(rhs);
    const double share = static_cast<double>(cls.size()) / static_cast<double>(n);
    for (Eigen::Index i = 0; i < m; ++i) mu(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(i)])) = share * pi(i);
  }
  return mu;
}

/// Components at infinite data: span frequencies are replaced by their
/// long-run probabilities under the uniform policy, and the same table
/// serves for fitting and scoring.
inline std::vector<Component> exact_components(const std::vector<ComponentKey>& keys, const ExBmdp& env) {
  const std::size_t n = env.n_obs(), na = env.n_actions();
  const auto N = static_cast<Eigen::Index>(n);
  std::vector<Eigen::MatrixXd> step(na, Eigen::MatrixXd::Zero(N, N));
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t x = 0; x < n; ++x)
      for (const Transition& t : env.transitions(x, a))
        step[a](static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(t.next)) += t.prob;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(N, N);
  for (const auto& m : step) mean += m / static_cast<double>(na);
  const Eigen::VectorXd mu = long_run_occupancy(env);

  std::size_t k_max = 1;
  for (const auto& key : keys) k_max = std::max(k_max, key.k);
  // powers[j] = mean^j
  std::vector<Eigen::MatrixXd> powers{Eigen::MatrixXd::Identity(N, N)};
  for (std::size_t j = 1; j < k_max; ++j) powers.push_back(powers.back() * mean);

  // Probability of reaching y exactly k steps after taking a at x, with
  // uniform actions afterwards.
  auto span_table = [&](std::size_t k, std::size_t a) -> Eigen::MatrixXd { return step[a] * powers[k - 1]; };
  const double pa = 1.0 / static_cast<double>(na);

  auto add_span = [&](detail::DenseTable& table, std::size_t ctx, std::size_t a, const Eigen::MatrixXd& m,
                      double factor) {
    for (std::size_t x = 0; x < n; ++x) {
      const double base = mu(static_cast<Eigen::Index>(x)) * factor;
      if (base == 0.0) continue;
      for (std::size_t y = 0; y < n; ++y) {
        const double v = m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
        if (v != 0.0) table.add(ctx, a, x, y, base * v);
      }
    }
  };

  std::vector<Component> out;
  for (const auto& key : keys) {
    Component c;
    c.key = key;
    c.contexts = detail::contexts_for(key, na);
    detail::DenseTable fit(c.contexts, na, n), score(c.contexts, na, n);
    switch (key.kind) {
      case ComponentKind::Inverse:
      case ComponentKind::Forward: {
        const std::size_t k = key.kind == ComponentKind::Inverse ? key.k : 1;
        for (std::size_t a = 0; a < na; ++a) {
          const Eigen::MatrixXd m = span_table(k, a);
          add_span(fit, 0, a, m, pa);
          add_span(score, 0, a, m, pa);
        }
        break;
      }
      case ComponentKind::FullMulti: {
        const auto offsets = detail::prefix_offsets(na, key.k);
        const double share = 1.0 / static_cast<double>(key.k);
        // Walk action prefixes depth-first, carrying the product of their step matrices.
        struct Frame {
          std::size_t depth, code;
          Eigen::MatrixXd prod;
        };
        std::vector<Frame> stack{{0, 0, Eigen::MatrixXd::Identity(N, N)}};
        while (!stack.empty()) {
          Frame f = std::move(stack.back());
          stack.pop_back();
          const double prefix_prob = std::pow(pa, static_cast<double>(f.depth));
          for (std::size_t a = 0; a < na; ++a) {
            Eigen::MatrixXd next = f.prod * step[a];
            const Eigen::MatrixXd m = next * powers[key.k - f.depth - 1];
            add_span(fit, offsets[f.depth] + f.code, a, m, prefix_prob * pa);
            add_span(score, offsets[f.depth] + f.code, a, m, prefix_prob * pa * share);
            if (f.depth + 1 < key.k) stack.push_back({f.depth + 1, f.code * na + a, std::move(next)});
          }
        }
        break;
      }
      case ComponentKind::Imprecise: {
        const std::size_t K = key.k;
        for (std::size_t k = 1; k <= K; ++k) {
          const double spread = 1.0 / static_cast<double>(K - k + 1);
          for (std::size_t label = k; label <= K; ++label)
            for (std::size_t a = 0; a < na; ++a) {
              const Eigen::MatrixXd m = span_table(k, a);
              add_span(fit, label - 1, a, m, pa * spread);
              add_span(score, label - 1, a, m, pa * spread / static_cast<double>(K));
            }
        }
        break;
      }
    }
    c.fit = fit.cells(1.0);
    c.score = score.cells(1.0);
    out.push_back(std::move(c));
  }
  return out;
}

} // namespace exlab
