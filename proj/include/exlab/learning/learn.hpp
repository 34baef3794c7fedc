#pragma once

/// \file learn.hpp
/// End-to-end learning: sample train and validation data (or use exact
/// long-run statistics), score every encoder, select the smallest
/// near-optimal one.

#include <optional>
#include <utility>

#include "exlab/learning/engine.hpp"
#include "exlab/sampling.hpp"

namespace exlab {

/// Largest observation count for exact statistics.
inline constexpr std::size_t kMaxExactObs = 12;

/// Size and layout of each of the two datasets.
struct DataParams {
  std::size_t n_trajectories = 1;
  std::size_t length = 5000;
  StartMode start;
};

struct LearnOptions {
  unsigned threads = 1;
  bool keep_losses = false;
  /// Span window; defaults to the configured K.
  std::optional<std::size_t> k_max;
};

/// Train and validation datasets drawn from independent streams of `seed`.
inline std::pair<TrajectoryDataset, TrajectoryDataset> sample_train_validation(const ExBmdp& env,
                                                                              const DataParams& data,
                                                                              std::uint64_t seed,
                                                                              unsigned threads = 1) {
  return {sample_dataset(env, data.n_trajectories, data.length, derive_seed(seed, 0), data.start, nullptr, threads),
          sample_dataset(env, data.n_trajectories, data.length, derive_seed(seed, 1), data.start, nullptr, threads)};
}

namespace detail {

inline LearnResult run_single(const LossEngine& engine, const ObjectivePlan& plan, const LossConfig& config,
                              std::uint64_t seed, const LearnOptions& options) {
  SearchResult sr = engine.search(plan.objectives, {options.threads, options.keep_losses});
  LearnResult r;
  r.encoder = sr.selections.front().selected.encoder;
  r.loss = sr.selections.front().selected.loss;
  r.n_evaluated = sr.n_evaluated;
  r.config = config;
  r.seed = seed;
  if (options.keep_losses) {
    std::vector<EncoderLoss> rows;
    rows.reserve(sr.rows.size());
    for (auto& [enc, vals] : sr.rows) rows.push_back({std::move(enc), vals.front()});
    r.per_encoder_losses = std::move(rows);
  }
  return r;
}

inline void require_exact_size(const ExBmdp& env) {
  if (env.n_obs() > kMaxExactObs)
    throw Error(ErrorKind::TooLarge, std::to_string(env.n_obs()) + " observations; exact statistics handle up to " +
                                         std::to_string(kMaxExactObs));
}

} // namespace detail

/// Learns from given datasets.
inline LearnResult learn_from_data(std::size_t n_obs, std::size_t n_actions, const TrajectoryDataset& train,
                                   const TrajectoryDataset& validation, const LossConfig& config,
                                   std::uint64_t seed = 0, const LearnOptions& options = {}) {
  const ObjectivePlan plan = plan_objectives({config});
  const std::size_t k_max = options.k_max.value_or(config.K);
  if (k_max < config.K) throw Error(ErrorKind::ConfigMismatch, "K_max is smaller than K");
  LossEngine engine(sampled_components(plan.components, train, validation, k_max, n_obs, n_actions), n_obs,
                    n_actions);
  return detail::run_single(engine, plan, config, seed, options);
}

/// Samples data with `seed` and learns from it.
inline LearnResult learn(const ExBmdp& env, const LossConfig& config, const DataParams& data, std::uint64_t seed,
                         const LearnOptions& options = {}) {
  require_enumerable(env.n_obs());
  const auto [train, validation] = sample_train_validation(env, data, seed, options.threads);
  return learn_from_data(env.n_obs(), env.n_actions(), train, validation, config, seed, options);
}

/// Learns from exact long-run statistics; no sampling.
inline LearnResult learn_exact(const ExBmdp& env, const LossConfig& config, const LearnOptions& options = {}) {
  detail::require_exact_size(env);
  const ObjectivePlan plan = plan_objectives({config});
  LossEngine engine(exact_components(plan.components, env), env.n_obs(), env.n_actions());
  return detail::run_single(engine, plan, config, 0, options);
}

/// Population value of the validation loss of `enc`.
inline double exact_loss(const Encoder& enc, const ExBmdp& env, const LossConfig& config) {
  detail::require_exact_size(env);
  const ObjectivePlan plan = plan_objectives({config});
  LossEngine engine(exact_components(plan.components, env), env.n_obs(), env.n_actions());
  return engine.evaluate(enc, plan.objectives).front();
}

/// Exact losses for several configurations in one pass over all encoders.
inline SearchResult search_exact(const ExBmdp& env, const std::vector<LossConfig>& configs,
                                 const SearchOptions& options = {}) {
  detail::require_exact_size(env);
  const ObjectivePlan plan = plan_objectives(configs);
  LossEngine engine(exact_components(plan.components, env), env.n_obs(), env.n_actions());
  return engine.search(plan.objectives, options);
}

} // namespace exlab
