#include "bidlab/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bidlab/parallel.hpp"

namespace bidlab {
namespace {

constexpr std::uint64_t kLaneInit = 101;
constexpr std::uint64_t kLaneAction = 102;
constexpr std::uint64_t kLaneShuffle = 103;

class AbPlannerEpisodePlanner final : public EpisodePlanner {
 public:
  AbPlannerEpisodePlanner(const nn::PlannerPolicy& policy, int m, double budget,
                          const PlannerRunOptions& options, CounterRng action_rng,
                          TrajectorySample* sink)
      : policy_(policy),
        m_(m),
        budget_(budget),
        options_(options),
        rng_(action_rng),
        sink_(sink),
        hidden_(policy.initial_hidden()) {}

  InitialPlanMode initial_mode() const override { return options_.initial_mode; }

  BudgetPlan plan_for_episode(int, const PlannerState& state) override {
    const double scale = static_cast<double>(m_) / budget_;
    const HistoryEntry& last = state.history.back();
    std::vector<double> feats = entry_features(last.plan, last.outcome, scale);
    policy_.advance(hidden_, feats);
    const nn::Heads heads = policy_.heads(hidden_, static_cast<double>(m_));

    std::vector<double> action(m_);
    for (int j = 0; j < m_; ++j) {
      action[j] = options_.stochastic ? heads.mean[j] + heads.sigma * rng_.normal(0.0, 1.0)
                                      : heads.mean[j];
    }

    // The policy acts in scale-free units; stretch by B/m before touching the
    // plan so one unit of action means one equal-split share.
    const double unit = budget_ / m_;
    std::vector<double> currency(m_);
    for (int j = 0; j < m_; ++j) currency[j] = action[j] * unit;
    const std::optional<double> clamp =
        options_.clamp_actions ? std::optional<double>(unit) : std::nullopt;
    BudgetPlan plan = apply_action(last.plan, currency, budget_, clamp);

    if (sink_) {
      StepSample step;
      step.logp = nn::gaussian_log_prob(action, heads.mean, heads.log_sigma);
      step.value = heads.value;
      step.obs = std::move(feats);
      step.action = std::move(action);
      sink_->steps.push_back(std::move(step));
    }
    return plan;
  }

 private:
  const nn::PlannerPolicy& policy_;
  int m_;
  double budget_;
  PlannerRunOptions options_;
  CounterRng rng_;
  TrajectorySample* sink_;
  nn::Tensor hidden_;
};

}  // namespace

void PPOConfig::validate() const {
  if (!(clip > 0.0 && clip < 1.0)) throw std::invalid_argument("PPOConfig: 0 < clip < 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("PPOConfig: 0 < gamma <= 1");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("PPOConfig: 0 <= gae_lambda <= 1");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("PPOConfig: learning_rate > 0");
  if (epochs < 1 || trajectories_per_iteration < 1 || minibatch_trajectories < 1) {
    throw std::invalid_argument("PPOConfig: counts must be >= 1");
  }
  if (iterations < 0) throw std::invalid_argument("PPOConfig: iterations >= 0");
}

void compute_gae(TrajectorySample& traj, double gamma, double gae_lambda) {
  const int n = static_cast<int>(traj.steps.size());
  double next_adv = 0.0;
  double next_value = 0.0;  // terminal bootstrap
  for (int t = n - 1; t >= 0; --t) {
    StepSample& s = traj.steps[t];
    const double delta = s.reward + gamma * next_value - s.value;
    next_adv = delta + gamma * gae_lambda * next_adv;
    s.advantage = next_adv;
    s.value_target = s.advantage + s.value;
    next_value = s.value;
  }
}

void normalize_advantages(std::vector<TrajectorySample>& batch) {
  size_t count = 0;
  double mean = 0.0;
  for (const auto& traj : batch) {
    for (const auto& s : traj.steps) {
      mean += s.advantage;
      ++count;
    }
  }
  if (count < 2) return;
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (const auto& traj : batch) {
    for (const auto& s : traj.steps) {
      const double d = s.advantage - mean;
      var += d * d;
    }
  }
  const double stddev = std::sqrt(var / static_cast<double>(count));
  const double denom = std::max(stddev, 1e-8);
  for (auto& traj : batch) {
    for (auto& s : traj.steps) s.advantage = (s.advantage - mean) / denom;
  }
}

namespace {

nn::UnrollBatch make_unroll_batch(const std::vector<TrajectorySample>& dataset,
                                  std::span<const int> indices, int obs_dim, int action_dim) {
  nn::UnrollBatch ub;
  ub.batch = static_cast<int>(indices.size());
  ub.steps = static_cast<int>(dataset[indices[0]].steps.size());
  ub.obs_dim = obs_dim;
  ub.action_dim = action_dim;
  ub.obs.resize(static_cast<size_t>(ub.batch) * ub.steps * obs_dim);
  ub.actions.resize(static_cast<size_t>(ub.batch) * ub.steps * action_dim);
  ub.scaled_budget.resize(ub.batch);
  for (int row = 0; row < ub.batch; ++row) {
    const TrajectorySample& traj = dataset[indices[row]];
    ub.scaled_budget[row] = traj.scaled_budget;
    for (int step = 0; step < ub.steps; ++step) {
      const StepSample& s = traj.steps[step];
      std::copy(s.obs.begin(), s.obs.end(), ub.obs_at(step, row));
      std::copy(s.action.begin(), s.action.end(), ub.action_at(step, row));
    }
  }
  return ub;
}

}  // namespace

PpoStats ppo_update(std::vector<TrajectorySample>& dataset, nn::TrainablePolicy& policy,
                    const PPOConfig& config, CounterRng order_rng) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("ppo_update: empty dataset");
  const size_t steps_per_traj = dataset.front().steps.size();
  if (steps_per_traj == 0) throw std::invalid_argument("ppo_update: empty trajectories");
  for (const auto& traj : dataset) {
    if (traj.steps.size() != steps_per_traj) {
      throw std::invalid_argument("ppo_update: trajectories must have equal length");
    }
  }

  PpoStats agg;
  double ratio_sum = 0.0;
  double clip_count = 0.0;
  size_t sample_count = 0;
  int minibatch_count = 0;

  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the dedicated stream keeps epochs reproducible.
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      std::swap(order[i], order[order_rng.uniform_int(0, i)]);
    }
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.minibatch_trajectories)) {
      const size_t stop =
          std::min(order.size(), start + static_cast<size_t>(config.minibatch_trajectories));
      std::span<const int> indices(order.data() + start, stop - start);

      nn::Graph g(true);
      nn::UnrollBatch ub =
          make_unroll_batch(dataset, indices, policy.obs_dim(), policy.action_dim());
      const nn::UnrollNodes nodes = policy.unroll(g, ub);

      const int batch = ub.batch;
      const int steps = ub.steps;
      const double inv_samples = 1.0 / (static_cast<double>(batch) * steps);

      int surr_total = -1;
      int vloss_total = -1;
      for (int step = 0; step < steps; ++step) {
        nn::Tensor logp_old(batch, 1);
        nn::Tensor adv(batch, 1);
        nn::Tensor vtarget(batch, 1);
        for (int row = 0; row < batch; ++row) {
          const StepSample& s = dataset[indices[row]].steps[step];
          logp_old.at(row, 0) = s.logp;
          adv.at(row, 0) = s.advantage;
          vtarget.at(row, 0) = s.value_target;
        }
        const int old_node = g.leaf(std::move(logp_old));
        const int adv_node = g.leaf(std::move(adv));
        const int vt_node = g.leaf(std::move(vtarget));

        const int ratio = g.exp_op(g.sub(nodes.logp[step], old_node));
        const int unclipped = g.hadamard(ratio, adv_node);
        const int clipped =
            g.hadamard(g.clamp_op(ratio, 1.0 - config.clip, 1.0 + config.clip), adv_node);
        const int surr = g.sum_all(g.min_elem(unclipped, clipped));
        surr_total = surr_total < 0 ? surr : g.add(surr_total, surr);

        const int verr = g.sum_all(g.square(g.sub(nodes.value[step], vt_node)));
        vloss_total = vloss_total < 0 ? verr : g.add(vloss_total, verr);

        const nn::Tensor& rv = g.value(ratio);
        for (int row = 0; row < batch; ++row) {
          ratio_sum += rv.at(row, 0);
          if (std::fabs(rv.at(row, 0) - 1.0) > config.clip) clip_count += 1.0;
        }
        sample_count += static_cast<size_t>(batch);
      }

      const int policy_loss = g.scale(surr_total, -inv_samples);
      const int value_loss = g.scale(vloss_total, inv_samples);
      const int loss =
          g.add(g.add(policy_loss, g.scale(value_loss, config.value_coef)),
                g.scale(nodes.entropy, -config.entropy_coef));

      if (!std::isfinite(g.value(loss).data[0])) {
        throw std::runtime_error("ppo_update: non-finite loss");
      }

      policy.params().zero_grad();
      g.backward(loss);
      nn::harvest_grads(g, nodes.bound, policy.params());
      policy.params().adam_step(config.learning_rate);

      agg.policy_loss += g.value(policy_loss).data[0];
      agg.value_loss += g.value(value_loss).data[0];
      agg.entropy += g.value(nodes.entropy).data[0];
      ++minibatch_count;
    }
  }

  agg.policy_loss /= minibatch_count;
  agg.value_loss /= minibatch_count;
  agg.entropy /= minibatch_count;
  agg.mean_ratio = ratio_sum / static_cast<double>(sample_count);
  agg.clip_fraction = clip_count / static_cast<double>(sample_count);
  return agg;
}

std::unique_ptr<EpisodePlanner> make_abplanner_episode_planner(
    const nn::PlannerPolicy& policy, int m, double budget, const PlannerRunOptions& options,
    CounterRng action_rng, TrajectorySample* sink) {
  return std::make_unique<AbPlannerEpisodePlanner>(policy, m, budget, options, action_rng,
                                                   sink);
}

TrajectorySample collect_planner_trajectory(const nn::PlannerPolicy& policy,
                                            const Advertiser& adv, int m, int episodes,
                                            const BidderSpec& bidder_spec,
                                            const PlannerRunOptions& options,
                                            const StreamSource& streams,
                                            CounterRng action_rng, bool with_vanilla) {
  TrajectorySample traj;
  traj.budget = adv.budget;
  traj.scaled_budget = static_cast<double>(m);

  auto planner =
      make_abplanner_episode_planner(policy, m, adv.budget, options, action_rng, &traj);
  const AdvertiserRun run = run_advertiser_episodes(*planner, adv.budget, m, episodes,
                                                    bidder_spec, streams, with_vanilla);

  traj.rewards_by_episode = run.rewards;
  for (size_t k = 0; k < traj.steps.size(); ++k) {
    traj.steps[k].reward = run.rewards[k + 1];
  }
  traj.episode_returns.reserve(run.outcomes.size());
  for (const auto& outcome : run.outcomes) traj.episode_returns.push_back(outcome.total_return());
  traj.plan_fractions.reserve(run.plans.size());
  for (const auto& plan : run.plans) {
    std::vector<double> fractions(plan.allocations());
    for (double& f : fractions) f /= adv.budget;
    traj.plan_fractions.push_back(std::move(fractions));
  }
  traj.vanilla_returns = run.vanilla_returns;
  return traj;
}

TrainResult train_abplanner(const EnvHandle& env, const PPOConfig& config,
                            const BidderSpec& bidder_spec, const PlannerRunOptions& options,
                            const nn::PolicySizes& sizes, std::uint64_t seed, int workers,
                            const TrainCallbacks& callbacks) {
  config.validate();
  if (env.episodes < 2) {
    throw std::invalid_argument("train_abplanner: need at least 2 episodes per advertiser");
  }

  CounterRng root(seed);
  nn::PlannerPolicy policy(sizes, root.split(kLaneInit).key());

  TrainResult result{policy.params(), policy.params(), -1,
                     -std::numeric_limits<double>::infinity()};

  const int n_t = config.trajectories_per_iteration;
  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    std::vector<TrajectorySample> dataset(n_t);
    parallel_for(n_t, workers, [&](int k) {
      const std::uint64_t lane =
          static_cast<std::uint64_t>(iteration) * static_cast<std::uint64_t>(n_t) + k;
      const Advertiser adv = env.advertiser_at(lane);
      const StreamSource streams = env.streams_for(adv, lane);
      CounterRng action_rng = root.split(kLaneAction).split(lane);
      dataset[k] = collect_planner_trajectory(policy, adv, env.m, env.episodes, bidder_spec,
                                              options, streams, action_rng, false);
    });

    IterationMetrics metrics;
    metrics.iteration = iteration;
    metrics.mean_return_by_episode.assign(env.episodes, 0.0);
    metrics.mean_reward_by_episode.assign(env.episodes, 0.0);
    for (const auto& traj : dataset) {
      for (int e = 0; e < env.episodes; ++e) {
        metrics.mean_return_by_episode[e] += traj.episode_returns[e];
        metrics.mean_reward_by_episode[e] += traj.rewards_by_episode[e];
      }
    }
    for (int e = 0; e < env.episodes; ++e) {
      metrics.mean_return_by_episode[e] /= n_t;
      metrics.mean_reward_by_episode[e] /= n_t;
    }

    for (auto& traj : dataset) compute_gae(traj, config.gamma, config.gae_lambda);
    normalize_advantages(dataset);
    metrics.stats = ppo_update(dataset, policy, config, root.split(kLaneShuffle).split(iteration));

    if (callbacks.on_iteration) callbacks.on_iteration(metrics);

    const double score = metrics.mean_return_by_episode.back();
    if (score > result.best_score) {
      result.best_score = score;
      result.best_iteration = iteration;
      result.best_params = policy.params();
    }
  }

  result.final_params = policy.params();
  return result;
}

}  // namespace bidlab
