#include "bidlab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bidlab/parallel.hpp"

namespace bidlab {

BudgetPlan equal_split_plan(double budget, int m) {
  if (!(budget > 0.0) || m < 1) {
    throw std::invalid_argument("equal_split_plan: need budget > 0 and m >= 1");
  }
  return BudgetPlan(std::vector<double>(static_cast<size_t>(m), budget / m), budget);
}

std::vector<double> make_bin_grid(double budget, int n_b) {
  if (n_b < 2) throw std::invalid_argument("make_bin_grid: need at least 2 bins");
  if (!(budget > 0.0)) throw std::invalid_argument("make_bin_grid: budget > 0");
  std::vector<double> bins(n_b);
  for (int j = 0; j < n_b; ++j) {
    bins[j] = budget * static_cast<double>(j) / static_cast<double>(n_b - 1);
  }
  return bins;
}

MckpResult solve_mckp(const std::vector<std::vector<double>>& q_values,
                      std::span<const double> bins, double budget) {
  const int m = static_cast<int>(q_values.size());
  const int n_b = static_cast<int>(bins.size());
  if (m < 1 || n_b < 2) throw std::invalid_argument("solve_mckp: need m >= 1, bins >= 2");
  if (bins[0] < 0.0) throw std::invalid_argument("solve_mckp: bins must be nonnegative");
  for (int j = 1; j < n_b; ++j) {
    if (!(bins[j] > bins[j - 1])) {
      throw std::invalid_argument("solve_mckp: bins must be strictly increasing");
    }
  }
  for (const auto& row : q_values) {
    if (static_cast<int>(row.size()) != n_b) {
      throw std::invalid_argument("solve_mckp: q matrix must be m x n_b");
    }
    for (double q : row) {
      if (!std::isfinite(q)) throw std::invalid_argument("solve_mckp: non-finite q");
    }
  }

  // Quantize the budget axis at the bin granularity.
  double delta = std::numeric_limits<double>::infinity();
  for (int j = 1; j < n_b; ++j) delta = std::min(delta, bins[j] - bins[j - 1]);
  if (bins[0] > 0.0) delta = std::min(delta, bins[0]);
  std::vector<long> weight(n_b);
  for (int j = 0; j < n_b; ++j) {
    weight[j] = std::lround(bins[j] / delta);
    const double tol = 1e-6 * std::max({1.0, std::fabs(bins[j]), budget});
    if (std::fabs(static_cast<double>(weight[j]) * delta - bins[j]) > tol) {
      throw std::invalid_argument("solve_mckp: bins not commensurate with the grid step");
    }
  }
  const long capacity = static_cast<long>(std::floor(budget / delta + 1e-9));
  if (capacity > 2'000'000L) {
    throw std::invalid_argument("solve_mckp: discretized budget axis too large");
  }

  MckpResult result;
  if (weight[0] * m > capacity) {
    // Even the smallest bin everywhere cannot fit.
    result.feasible = false;
    result.chosen_bins.assign(m, 0);
    result.allocation.assign(m, bins[0]);
    for (int i = 0; i < m; ++i) result.total_q += q_values[i][0];
    return result;
  }

  struct Cell {
    double q = -std::numeric_limits<double>::infinity();
    long spend = 0;
  };
  const long cap1 = capacity + 1;
  std::vector<Cell> next(cap1), cur(cap1);
  for (long c = 0; c <= capacity; ++c) next[c] = Cell{0.0, 0};

  std::vector<std::vector<Cell>> table(m, std::vector<Cell>(cap1));
  for (int i = m - 1; i >= 0; --i) {
    for (long c = 0; c <= capacity; ++c) {
      Cell best;
      for (int j = 0; j < n_b; ++j) {
        if (weight[j] > c) break;  // bins increase, so weights do too
        const Cell& tail = next[c - weight[j]];
        if (!std::isfinite(tail.q)) continue;
        const double q = q_values[i][j] + tail.q;
        const long spend = weight[j] + tail.spend;
        if (q > best.q || (q == best.q && spend < best.spend)) {
          best.q = q;
          best.spend = spend;
        }
      }
      cur[c] = best;
    }
    table[i] = cur;
    std::swap(next, cur);
  }

  // Forward reconstruction; taking the smallest bin index that attains the
  // optimal (q, spend) yields the lexicographically smallest plan.
  result.chosen_bins.assign(m, 0);
  result.allocation.assign(m, 0.0);
  long c = capacity;
  for (int i = 0; i < m; ++i) {
    const Cell target = table[i][c];
    bool found = false;
    for (int j = 0; j < n_b && !found; ++j) {
      if (weight[j] > c) break;
      double tail_q = 0.0;
      long tail_spend = 0;
      if (i + 1 < m) {
        const Cell& tail = table[i + 1][c - weight[j]];
        if (!std::isfinite(tail.q)) continue;
        tail_q = tail.q;
        tail_spend = tail.spend;
      }
      if (q_values[i][j] + tail_q == target.q && weight[j] + tail_spend == target.spend) {
        result.chosen_bins[i] = j;
        result.allocation[i] = bins[j];
        c -= weight[j];
        found = true;
      }
    }
    if (!found) throw std::logic_error("solve_mckp: reconstruction failed");
  }
  result.total_q = table[0][capacity].q;
  return result;
}

// ---------------------------------------------------------------------------
// Q-MCKP model

void QMckpConfig::validate() const {
  if (bins < 2) throw std::invalid_argument("QMckpConfig: bins >= 2");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("QMckpConfig: learning_rate > 0");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("QMckpConfig: epsilon in [0,1]");
  if (enc_out < 1 || gru_hidden < 1 || head_hidden < 1) {
    throw std::invalid_argument("QMckpConfig: sizes must be positive");
  }
  if (iterations < 0 || advertisers_per_iteration < 1 || epochs < 1 || minibatch < 1) {
    throw std::invalid_argument("QMckpConfig: bad training counts");
  }
}

namespace {

std::string stage_prefix(int stage) { return "s" + std::to_string(stage) + "."; }

}  // namespace

QMckpModel::QMckpModel(int m, const QMckpConfig& config, std::uint64_t init_seed)
    : m_(m), config_(config) {
  if (m_ < 1) throw std::invalid_argument("QMckpModel: m >= 1");
  config_.validate();
  CounterRng rng(init_seed);
  for (int stage = 0; stage < m_; ++stage) {
    const std::string p = stage_prefix(stage);
    CounterRng srng = rng.split(stage);
    CounterRng r0 = srng.split(0);
    store_.add(p + "enc.W", nn::init_uniform_fanin(3, config_.enc_out, r0));
    store_.add(p + "enc.b", nn::Tensor(1, config_.enc_out));
    nn::add_gru_params(store_, p + "gru.", config_.enc_out, config_.gru_hidden, srng.split(1));
    CounterRng r2 = srng.split(2);
    store_.add(p + "head.W1",
               nn::init_uniform_fanin(config_.gru_hidden + 1, config_.head_hidden, r2));
    store_.add(p + "head.b1", nn::Tensor(1, config_.head_hidden));
    CounterRng r3 = srng.split(3);
    store_.add(p + "head.W2", nn::init_uniform_fanin(config_.head_hidden, config_.bins, r3));
    store_.add(p + "head.b2", nn::Tensor(1, config_.bins));
  }
}

QMckpModel::QMckpModel(int m, const QMckpConfig& config, nn::ParamStore store)
    : m_(m), config_(config), store_(std::move(store)) {
  for (int stage = 0; stage < m_; ++stage) {
    if (store_.index_of(stage_prefix(stage) + "enc.W") < 0) {
      throw std::runtime_error("QMckpModel: checkpoint missing stage " + std::to_string(stage));
    }
  }
}

struct QMckpModel::StageNodes {
  int encW, encB;
  nn::GruCellNodes gru;
  int headW1, headB1, headW2, headB2;
};

QMckpModel::StageNodes QMckpModel::bind_stage(nn::Graph& g, const nn::BoundParams& bound,
                                              int stage) const {
  const std::string p = stage_prefix(stage);
  auto id = [&](const std::string& name) { return bound.node_of[store_.index_of(p + name)]; };
  StageNodes s{};
  s.encW = id("enc.W");
  s.encB = id("enc.b");
  s.gru = nn::resolve_gru(store_, bound, p + "gru.");
  s.headW1 = id("head.W1");
  s.headB1 = id("head.b1");
  s.headW2 = id("head.W2");
  s.headB2 = id("head.b2");
  return s;
}

void QMckpModel::advance(int stage, nn::Tensor& hidden,
                         std::span<const double, 3> features) const {
  nn::Graph g(false);
  const nn::BoundParams bound = nn::bind_params(g, store_);
  const StageNodes s = bind_stage(g, bound, stage);
  const int x = g.constant_row(std::span<const double>(features.data(), 3));
  const int e = g.relu(g.add_row(g.matmul(x, s.encW), s.encB));
  const int h = g.leaf(hidden);
  hidden = g.value(nn::gru_cell_node(g, s.gru, h, e));
}

std::vector<double> QMckpModel::q_values(int stage, const nn::Tensor& hidden,
                                         double scaled_budget) const {
  nn::Graph g(false);
  const nn::BoundParams bound = nn::bind_params(g, store_);
  const StageNodes s = bind_stage(g, bound, stage);
  const int h = g.leaf(hidden);
  const int hb = g.concat_cols(h, g.constant_column(hidden.rows, scaled_budget));
  const int l1 = g.relu(g.add_row(g.matmul(hb, s.headW1), s.headB1));
  const int q = g.add_row(g.matmul(l1, s.headW2), s.headB2);
  return g.value(q).data;
}

double QMckpModel::fit_minibatch(std::span<const FitSample> samples, double learning_rate) {
  if (samples.empty()) return 0.0;
  nn::Graph g(true);
  const nn::BoundParams bound = nn::bind_params(g, store_);
  std::vector<StageNodes> stages;
  stages.reserve(m_);
  for (int stage = 0; stage < m_; ++stage) stages.push_back(bind_stage(g, bound, stage));

  int loss_sum = -1;
  for (const FitSample& sample : samples) {
    const StageNodes& s = stages[sample.stage];
    int h = g.leaf(nn::Tensor(1, config_.gru_hidden));
    for (const auto& feats : sample.sequence) {
      const int x = g.constant_row(std::span<const double>(feats.data(), 3));
      const int e = g.relu(g.add_row(g.matmul(x, s.encW), s.encB));
      h = nn::gru_cell_node(g, s.gru, h, e);
    }
    const int hb = g.concat_cols(h, g.constant_column(1, static_cast<double>(m_)));
    const int l1 = g.relu(g.add_row(g.matmul(hb, s.headW1), s.headB1));
    const int q = g.add_row(g.matmul(l1, s.headW2), s.headB2);
    std::vector<double> onehot(config_.bins, 0.0);
    onehot[sample.bin] = 1.0;
    const int picked = g.row_sum(g.hadamard(q, g.constant_row(onehot)));
    const int err = g.square(g.add_const(picked, -sample.target));
    loss_sum = loss_sum < 0 ? err : g.add(loss_sum, err);
  }
  const int loss = g.scale(loss_sum, 1.0 / static_cast<double>(samples.size()));
  const double loss_value = g.value(loss).data[0];
  store_.zero_grad();
  g.backward(loss);
  nn::harvest_grads(g, bound, store_);
  store_.adam_step(learning_rate);
  return loss_value;
}

std::vector<std::pair<std::string, std::string>> QMckpModel::checkpoint_meta() const {
  return {
      {"policy", "qmckp"},
      {"m", std::to_string(m_)},
      {"bins", std::to_string(config_.bins)},
      {"enc_out", std::to_string(config_.enc_out)},
      {"gru_hidden", std::to_string(config_.gru_hidden)},
      {"head_hidden", std::to_string(config_.head_hidden)},
  };
}

QMckpConfig QMckpModel::config_from_meta(
    const std::vector<std::pair<std::string, std::string>>& meta, int* m_out) {
  auto value = [&](const std::string& key) -> std::string {
    for (const auto& [k, v] : meta) {
      if (k == key) return v;
    }
    throw std::runtime_error("qmckp checkpoint meta missing " + key);
  };
  QMckpConfig cfg;
  cfg.bins = std::stoi(value("bins"));
  cfg.enc_out = std::stoi(value("enc_out"));
  cfg.gru_hidden = std::stoi(value("gru_hidden"));
  cfg.head_hidden = std::stoi(value("head_hidden"));
  if (m_out) *m_out = std::stoi(value("m"));
  return cfg;
}

int nearest_bin(std::span<const double> bins, double value) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < bins.size(); ++j) {
    const double d = std::fabs(bins[j] - value);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

QMckpPlanner::QMckpPlanner(const QMckpModel& model, double budget, InitialPlanMode mode,
                           double epsilon, CounterRng explore_rng,
                           std::vector<QMckpModel::FitSample>* sink)
    : model_(model),
      budget_(budget),
      mode_(mode),
      epsilon_(epsilon),
      rng_(explore_rng),
      sink_(sink),
      bins_(make_bin_grid(budget, model.bin_count())) {
  hidden_.assign(model_.stage_count(), model_.initial_hidden());
  sequences_.assign(model_.stage_count(), {});
}

BudgetPlan QMckpPlanner::plan_for_episode(int, const PlannerState& state) {
  const int m = model_.stage_count();
  const double scale = static_cast<double>(m) / budget_;
  const HistoryEntry& last = state.history.back();

  std::vector<std::vector<double>> q(m);
  for (int i = 0; i < m; ++i) {
    const std::array<double, 3> feats = {last.plan.allocations()[i] * scale,
                                         last.outcome.returns[i] * scale,
                                         last.outcome.costs[i] * scale};
    model_.advance(i, hidden_[i], feats);
    sequences_[i].push_back(feats);
    q[i] = model_.q_values(i, hidden_[i], static_cast<double>(m));
  }

  std::vector<double> alloc(m, 0.0);
  if (epsilon_ > 0.0 && rng_.uniform01() < epsilon_) {
    // Random feasible combination, sampled stage by stage in grid units.
    long remaining = static_cast<long>(bins_.size()) - 1;
    for (int i = 0; i < m; ++i) {
      const int j = rng_.uniform_int(0, static_cast<int>(remaining));
      alloc[i] = bins_[j];
      remaining -= j;
    }
  } else {
    alloc = solve_mckp(q, bins_, budget_).allocation;
  }
  return BudgetPlan(std::move(alloc), budget_);
}

void QMckpPlanner::observe(int episode_index, const BudgetPlan& plan,
                           const EpisodeOutcome& outcome) {
  if (sink_ == nullptr || episode_index == 0) return;
  for (int i = 0; i < model_.stage_count(); ++i) {
    QMckpModel::FitSample sample;
    sample.stage = i;
    sample.sequence = sequences_[i];
    sample.bin = nearest_bin(bins_, plan.allocations()[i]);
    sample.target = outcome.returns[i];
    sink_->push_back(std::move(sample));
  }
}

TrainResult train_qmckp(const EnvHandle& env, const QMckpConfig& config,
                        const BidderSpec& bidder_spec, InitialPlanMode initial_mode,
                        std::uint64_t seed, int workers, const TrainCallbacks& callbacks) {
  config.validate();
  CounterRng root(seed);
  QMckpModel model(env.m, config, root.split(201).key());

  TrainResult result{model.params(), model.params(), -1,
                     -std::numeric_limits<double>::infinity()};

  struct Slot {
    std::vector<QMckpModel::FitSample> samples;
    std::vector<double> episode_returns;
    std::vector<double> rewards;
  };

  const int n_adv = config.advertisers_per_iteration;
  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    const double decay = config.iterations > 1
                             ? 1.0 - static_cast<double>(iteration) / (config.iterations - 1)
                             : 1.0;
    const double epsilon = config.epsilon * decay;

    std::vector<Slot> slots(n_adv);
    parallel_for(n_adv, workers, [&](int k) {
      const std::uint64_t lane =
          static_cast<std::uint64_t>(iteration) * static_cast<std::uint64_t>(n_adv) + k;
      const Advertiser adv = env.advertiser_at(lane);
      QMckpPlanner planner(model, adv.budget, initial_mode, epsilon,
                           root.split(202).split(lane), &slots[k].samples);
      const AdvertiserRun run = run_advertiser_episodes(
          planner, adv.budget, env.m, env.episodes, bidder_spec, env.streams_for(adv, lane),
          false);
      for (const auto& outcome : run.outcomes) {
        slots[k].episode_returns.push_back(outcome.total_return());
      }
      slots[k].rewards = run.rewards;
    });

    IterationMetrics metrics;
    metrics.iteration = iteration;
    metrics.mean_return_by_episode.assign(env.episodes, 0.0);
    metrics.mean_reward_by_episode.assign(env.episodes, 0.0);
    std::vector<QMckpModel::FitSample> dataset;
    for (const Slot& slot : slots) {
      for (int e = 0; e < env.episodes; ++e) {
        metrics.mean_return_by_episode[e] += slot.episode_returns[e];
        metrics.mean_reward_by_episode[e] += slot.rewards[e];
      }
      dataset.insert(dataset.end(), slot.samples.begin(), slot.samples.end());
    }
    for (int e = 0; e < env.episodes; ++e) {
      metrics.mean_return_by_episode[e] /= n_adv;
      metrics.mean_reward_by_episode[e] /= n_adv;
    }

    CounterRng shuffle = root.split(203).split(iteration);
    double loss_sum = 0.0;
    int loss_count = 0;
    std::vector<int> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
        std::swap(order[i], order[shuffle.uniform_int(0, i)]);
      }
      for (size_t start = 0; start < order.size();
           start += static_cast<size_t>(config.minibatch)) {
        const size_t stop =
            std::min(order.size(), start + static_cast<size_t>(config.minibatch));
        std::vector<QMckpModel::FitSample> batch;
        batch.reserve(stop - start);
        for (size_t idx = start; idx < stop; ++idx) batch.push_back(dataset[order[idx]]);
        loss_sum += model.fit_minibatch(batch, config.learning_rate);
        ++loss_count;
      }
    }
    metrics.stats.value_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    if (callbacks.on_iteration) callbacks.on_iteration(metrics);

    const double score = metrics.mean_return_by_episode.back();
    if (score > result.best_score) {
      result.best_score = score;
      result.best_iteration = iteration;
      result.best_params = model.params();
    }
  }
  result.final_params = model.params();
  return result;
}

// ---------------------------------------------------------------------------
// HiBid'

double squash_allocation(double raw_action, double remaining) {
  if (!(remaining > 0.0)) return 0.0;
  return remaining / (1.0 + std::exp(-raw_action));
}

std::array<double, 3> hibid_state_features(int stage_index, int m, double consumed,
                                           double remaining, double budget) {
  const double scale = static_cast<double>(m) / budget;
  return {static_cast<double>(stage_index + 1) / m, consumed * scale, remaining * scale};
}

double hibid_prime_allocate(const nn::FeedforwardPolicy& policy, int stage_index, int m,
                            double consumed, double remaining, double budget) {
  if (!(remaining > 0.0)) return 0.0;
  const auto feats = hibid_state_features(stage_index, m, consumed, remaining, budget);
  const nn::Heads heads = policy.heads(feats);
  return squash_allocation(heads.mean[0], remaining);
}

HibidPlanner::HibidPlanner(const nn::FeedforwardPolicy& policy, double budget, int m,
                           InitialPlanMode mode, bool stochastic, CounterRng action_rng,
                           std::vector<TrajectorySample>* sink)
    : policy_(policy),
      budget_(budget),
      m_(m),
      mode_(mode),
      stochastic_(stochastic),
      rng_(action_rng),
      sink_(sink) {}

BudgetPlan HibidPlanner::plan_for_episode(int, const PlannerState&) {
  throw std::logic_error("HibidPlanner plans per stage");
}

double HibidPlanner::allocate_stage(int, int stage_index, double consumed,
                                    double remaining) {
  const auto feats = hibid_state_features(stage_index, m_, consumed, remaining, budget_);
  const nn::Heads heads = policy_.heads(feats);
  const double raw =
      stochastic_ ? heads.mean[0] + heads.sigma * rng_.normal(0.0, 1.0) : heads.mean[0];
  const double alloc = squash_allocation(raw, remaining);
  if (sink_) {
    StepSample step;
    step.obs.assign(feats.begin(), feats.end());
    step.action = {raw};
    step.logp = nn::gaussian_log_prob(step.action, heads.mean, heads.log_sigma);
    step.value = heads.value;
    current_.steps.push_back(std::move(step));
  }
  return alloc;
}

void HibidPlanner::observe(int episode_index, const BudgetPlan& plan,
                           const EpisodeOutcome& outcome) {
  if (sink_ == nullptr || episode_index == 0) return;
  if (static_cast<int>(current_.steps.size()) != m_) {
    current_.steps.clear();
    return;  // incomplete episode, drop it
  }
  current_.budget = budget_;
  current_.scaled_budget = 0.0;  // unused by the feedforward policy
  for (int i = 0; i < m_; ++i) current_.steps[i].reward = outcome.returns[i];
  std::vector<double> fractions(plan.allocations());
  for (double& f : fractions) f /= budget_;
  current_.plan_fractions.push_back(std::move(fractions));
  sink_->push_back(std::move(current_));
  current_ = TrajectorySample{};
}

TrainResult train_hibid(const EnvHandle& env, const PPOConfig& ppo_config,
                        const HibidConfig& hibid_config, const BidderSpec& bidder_spec,
                        InitialPlanMode initial_mode, std::uint64_t seed, int workers,
                        const TrainCallbacks& callbacks) {
  ppo_config.validate();
  if (env.episodes < 2) {
    throw std::invalid_argument("train_hibid: need at least 2 episodes per advertiser");
  }
  CounterRng root(seed);
  nn::FeedforwardSizes sizes;
  sizes.obs_dim = 3;
  sizes.action_dim = 1;
  sizes.hidden = hibid_config.hidden;
  nn::FeedforwardPolicy policy(sizes, root.split(301).key());

  TrainResult result{policy.params(), policy.params(), -1,
                     -std::numeric_limits<double>::infinity()};

  struct Slot {
    std::vector<TrajectorySample> trajs;
    std::vector<double> episode_returns;
    std::vector<double> rewards;
  };

  const int traj_per_adv = env.episodes - 1;
  const int n_adv =
      (ppo_config.trajectories_per_iteration + traj_per_adv - 1) / traj_per_adv;

  for (int iteration = 0; iteration < ppo_config.iterations; ++iteration) {
    std::vector<Slot> slots(n_adv);
    parallel_for(n_adv, workers, [&](int k) {
      const std::uint64_t lane =
          static_cast<std::uint64_t>(iteration) * static_cast<std::uint64_t>(n_adv) + k;
      const Advertiser adv = env.advertiser_at(lane);
      HibidPlanner planner(policy, adv.budget, env.m, initial_mode, true,
                           root.split(302).split(lane), &slots[k].trajs);
      const AdvertiserRun run = run_advertiser_episodes(
          planner, adv.budget, env.m, env.episodes, bidder_spec, env.streams_for(adv, lane),
          false);
      for (const auto& outcome : run.outcomes) {
        slots[k].episode_returns.push_back(outcome.total_return());
      }
      slots[k].rewards = run.rewards;
    });

    IterationMetrics metrics;
    metrics.iteration = iteration;
    metrics.mean_return_by_episode.assign(env.episodes, 0.0);
    metrics.mean_reward_by_episode.assign(env.episodes, 0.0);
    std::vector<TrajectorySample> dataset;
    for (const Slot& slot : slots) {
      for (int e = 0; e < env.episodes; ++e) {
        metrics.mean_return_by_episode[e] += slot.episode_returns[e];
        metrics.mean_reward_by_episode[e] += slot.rewards[e];
      }
      for (const auto& traj : slot.trajs) dataset.push_back(traj);
    }
    for (int e = 0; e < env.episodes; ++e) {
      metrics.mean_return_by_episode[e] /= n_adv;
      metrics.mean_reward_by_episode[e] /= n_adv;
    }

    for (auto& traj : dataset) compute_gae(traj, ppo_config.gamma, ppo_config.gae_lambda);
    normalize_advantages(dataset);
    metrics.stats = ppo_update(dataset, policy, ppo_config, root.split(303).split(iteration));
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
