#pragma once

/// \file counts.hpp
/// Latent-level count tables built directly from encoded trajectories, and
/// the validation loss computed from them. This is the straightforward
/// route; the search engine computes the same quantities from
/// observation-level tables.

#include <cmath>
#include <compare>
#include <map>
#include <vector>

#include "exlab/learning/config.hpp"
#include "exlab/learning/statistics.hpp"
#include "exlab/sampling.hpp"

namespace exlab {

/// Conditioning context of the inverse classifier plus the two latent labels.
/// The context is {k} for ACState and ACDF, {label} for ImpreciseK, and
/// {k, j, a_t, ..., a_{t+j-1}} for FullMulti.
struct InverseKey {
  std::vector<std::size_t> context;
  std::uint32_t s = 0;
  std::uint32_t s_next = 0;
  friend auto operator<=>(const InverseKey&, const InverseKey&) = default;
};

struct CountTables {
  LossVariant variant = LossVariant::ACState;
  std::uint32_t n_latent = 0;
  std::size_t n_actions = 0;
  std::size_t k_max = 0;
  /// Per-action counts of the inverse classifier.
  std::map<InverseKey, std::vector<double>> f_num;
  std::map<InverseKey, double> f_den;
  /// Forward counts, indexed [(s * A + a) * n_latent + s'] and [s * A + a].
  std::vector<double> g_num;
  std::vector<double> g_den;

  double f_hat(const InverseKey& key, std::size_t a, double floor) const {
    auto it = f_den.find(key);
    if (it == f_den.end() || it->second <= 0.0) return 1.0 / static_cast<double>(n_actions);
    const double num = f_num.at(key)[a];
    return num > 0.0 ? num / it->second : floor;
  }

  double g_hat(std::uint32_t s, std::size_t a, std::uint32_t s_next, double floor) const {
    const double den = g_den[s * n_actions + a];
    if (den <= 0.0) return 1.0 / static_cast<double>(n_latent);
    const double num = g_num[(s * n_actions + a) * n_latent + s_next];
    return num > 0.0 ? num / den : floor;
  }
};

namespace detail {

inline void count_inverse(CountTables& ct, InverseKey key, std::size_t a) {
  auto& row = ct.f_num[key];
  if (row.empty()) row.assign(ct.n_actions, 0.0);
  row[a] += 1.0;
  ct.f_den[key] += 1.0;
}

} // namespace detail

/// Fits the classifiers of `variant` on `train` with spans windowed for
/// `k_max`. For ImpreciseK the length labels are drawn on {k..k_max}.
inline CountTables fit_counts(const Encoder& enc, const TrajectoryDataset& train, std::size_t k_max,
                              LossVariant variant, std::size_t n_actions) {
  const SpanIndex idx = span_index(train, k_max);
  CountTables ct;
  ct.variant = variant;
  ct.n_latent = enc.n_latent;
  ct.n_actions = n_actions;
  ct.k_max = k_max;
  ct.g_num.assign(static_cast<std::size_t>(enc.n_latent) * n_actions * enc.n_latent, 0.0);
  ct.g_den.assign(static_cast<std::size_t>(enc.n_latent) * n_actions, 0.0);
  for (std::size_t i = 0; i < train.trajectories.size(); ++i) {
    const Trajectory& tr = train.trajectories[i];
    for (std::size_t t = 0; t < idx.anchors[i]; ++t) {
      const std::uint32_t s = enc[tr.obs[t]];
      const std::size_t a = tr.actions[t];
      const std::uint32_t s1 = enc[tr.obs[t + 1]];
      ct.g_num[(s * n_actions + a) * enc.n_latent + s1] += 1.0;
      ct.g_den[s * n_actions + a] += 1.0;
      for (std::size_t k = 1; k <= k_max; ++k) {
        const std::uint32_t sk = enc[tr.obs[t + k]];
        switch (variant) {
          case LossVariant::ACState:
          case LossVariant::ACDF: detail::count_inverse(ct, {{k}, s, sk}, a); break;
          case LossVariant::ImpreciseK:
            detail::count_inverse(ct, {{imprecise_label(train.seed, i, t, k, k_max)}, s, sk}, a);
            break;
          case LossVariant::FullMulti: {
            std::vector<std::size_t> context{k, 0};
            for (std::size_t j = 0; j < k; ++j) {
              context[1] = j;
              detail::count_inverse(ct, {context, s, sk}, tr.actions[t + j]);
              context.push_back(tr.actions[t + j]);
            }
            break;
          }
        }
      }
    }
  }
  return ct;
}

/// Validation loss of `enc` under `config`, using classifiers in `counts`.
inline double eval_loss(const Encoder& enc, const CountTables& counts, const TrajectoryDataset& validation,
                        const LossConfig& config) {
  config.validate();
  auto family = [](LossVariant v) { return v == LossVariant::ACDF ? LossVariant::ACState : v; };
  if (family(counts.variant) != family(config.variant))
    throw Error(ErrorKind::ConfigMismatch, "counts were fitted for " + to_string(counts.variant) + ", not " +
                                               to_string(config.variant));
  if (counts.k_max < config.K)
    throw Error(ErrorKind::ConfigMismatch, "counts cover K_max=" + std::to_string(counts.k_max) + " < K=" +
                                               std::to_string(config.K));
  if (config.variant == LossVariant::ImpreciseK && counts.k_max != config.K)
    throw Error(ErrorKind::ConfigMismatch, "imprecise-k counts must be fitted with K_max equal to K");
  if (enc.n_latent != counts.n_latent) throw Error(ErrorKind::ConfigMismatch, "encoder differs from the fitted one");

  const SpanIndex idx = span_index(validation, counts.k_max);
  const double floor = config.smoothing_floor;
  const double n_spans = static_cast<double>(idx.total_anchors());
  const std::size_t K = config.K;
  double inverse_total = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < validation.trajectories.size(); ++i) {
      const Trajectory& tr = validation.trajectories[i];
      for (std::size_t t = 0; t < idx.anchors[i]; ++t) {
        const std::uint32_t s = enc[tr.obs[t]], sk = enc[tr.obs[t + k]];
        const std::size_t a = tr.actions[t];
        switch (config.variant) {
          case LossVariant::ACState:
          case LossVariant::ACDF: sum -= std::log(counts.f_hat({{k}, s, sk}, a, floor)); break;
          case LossVariant::ImpreciseK:
            sum -= std::log(counts.f_hat({{imprecise_label(validation.seed, i, t, k, K)}, s, sk}, a, floor));
            break;
          case LossVariant::FullMulti: {
            std::vector<std::size_t> context{k, 0};
            double inner = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
              context[1] = j;
              inner -= std::log(counts.f_hat({context, s, sk}, tr.actions[t + j], floor));
              context.push_back(tr.actions[t + j]);
            }
            sum += inner / static_cast<double>(k);
            break;
          }
        }
      }
    }
    inverse_total += sum / n_spans;
  }
  double loss = inverse_total / static_cast<double>(K);
  if (config.variant == LossVariant::ACDF) {
    double sum = 0.0;
    for (std::size_t i = 0; i < validation.trajectories.size(); ++i) {
      const Trajectory& tr = validation.trajectories[i];
      for (std::size_t t = 0; t < idx.anchors[i]; ++t)
        sum -= std::log(counts.g_hat(enc[tr.obs[t]], tr.actions[t], enc[tr.obs[t + 1]], floor));
    }
    loss += sum / n_spans;
  }
  return loss;
}

} // namespace exlab
