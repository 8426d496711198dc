#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bidlab/bidders.hpp"
#include "bidlab/hier.hpp"
#include "bidlab/nn/policy.hpp"
#include "bidlab/rng.hpp"

namespace bidlab {

struct PPOConfig {
  double clip = 0.2;
  double learning_rate = 3e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs = 4;
  int trajectories_per_iteration = 64;
  int minibatch_trajectories = 16;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int iterations = 156;

  void validate() const;
};

struct StepSample {
  std::vector<double> obs;     ///< encoder features consumed at this step
  std::vector<double> action;  ///< policy-space (scale-free) action
  double logp = 0.0;           ///< behavior log-density at collection time
  double value = 0.0;          ///< critic estimate at collection time
  double reward = 0.0;
  double advantage = 0.0;
  double value_target = 0.0;
};

/// One advertiser's worth of planner decisions plus the bookkeeping the
/// metrics need.
struct TrajectorySample {
  double budget = 0.0;
  double scaled_budget = 0.0;                      ///< m, by construction
  std::vector<StepSample> steps;
  std::vector<double> episode_returns;             ///< per episode index
  std::vector<double> rewards_by_episode;          ///< [0] = 0
  std::vector<std::vector<double>> plan_fractions; ///< [episode][stage], rho/B
  std::vector<double> vanilla_returns;             ///< filled when requested
};

/// Generalized advantage estimates with a terminal bootstrap of zero;
/// value_target = advantage + collected value.
void compute_gae(TrajectorySample& traj, double gamma, double gae_lambda);

/// In-place batch normalization of advantages to mean 0, std 1 (no-op for
/// fewer than two steps total).
void normalize_advantages(std::vector<TrajectorySample>& batch);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
};

/// One PPO-clip pass over the dataset: epochs x shuffled trajectory
/// minibatches, each taking one optimizer step on
/// policy + value_coef * value - entropy_coef * entropy.
/// Throws on non-finite losses.
PpoStats ppo_update(std::vector<TrajectorySample>& dataset, nn::TrainablePolicy& policy,
                    const PPOConfig& config, CounterRng order_rng);

struct PlannerRunOptions {
  InitialPlanMode initial_mode = InitialPlanMode::first_episode_consumption;
  bool clamp_actions = true;  ///< clip each currency action component to B/m
  bool stochastic = true;     ///< false: act with the distribution mean
};

/// Wraps the recurrent policy as an episode planner. When `sink` is non-null
/// every decision is recorded there for training.
std::unique_ptr<EpisodePlanner> make_abplanner_episode_planner(
    const nn::PlannerPolicy& policy, int m, double budget, const PlannerRunOptions& options,
    CounterRng action_rng, TrajectorySample* sink);

/// Algorithm: sample advertiser, build the initial plan, then one decision
/// per later episode -- act, project, run the episode, score the increment.
TrajectorySample collect_planner_trajectory(const nn::PlannerPolicy& policy,
                                            const Advertiser& adv, int m, int episodes,
                                            const BidderSpec& bidder_spec,
                                            const PlannerRunOptions& options,
                                            const StreamSource& streams,
                                            CounterRng action_rng, bool with_vanilla);

/// One environment handle serves both the synthetic and the replay
/// environments: advertisers and their episode streams, addressed by lane so
/// parallel collection stays deterministic.
struct EnvHandle {
  int m = 0;
  int episodes = 0;
  /// <=0 means unlimited (synthetic sampling); replay reports its roster size.
  int max_advertisers = -1;
  std::function<Advertiser(std::uint64_t lane)> advertiser_at;
  std::function<StreamSource(const Advertiser& adv, std::uint64_t lane)> streams_for;
};

struct IterationMetrics {
  int iteration = 0;
  std::vector<double> mean_return_by_episode;
  std::vector<double> mean_reward_by_episode;
  PpoStats stats;
};

struct TrainCallbacks {
  std::function<void(const IterationMetrics&)> on_iteration;
};

struct TrainResult {
  nn::ParamStore final_params;
  nn::ParamStore best_params;
  int best_iteration = -1;
  double best_score = 0.0;  ///< mean last-episode return
};

/// Alternates trajectory collection (parallel, frozen snapshot) with PPO
/// updates for config.iterations rounds.
TrainResult train_abplanner(const EnvHandle& env, const PPOConfig& config,
                            const BidderSpec& bidder_spec, const PlannerRunOptions& options,
                            const nn::PolicySizes& sizes, std::uint64_t seed, int workers,
                            const TrainCallbacks& callbacks);

}  // namespace bidlab
