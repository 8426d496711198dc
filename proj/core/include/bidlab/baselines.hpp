#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "bidlab/hier.hpp"
#include "bidlab/nn/policy.hpp"
#include "bidlab/ppo.hpp"
#include "bidlab/rng.hpp"

namespace bidlab {

BudgetPlan equal_split_plan(double budget, int m);

/// Planner that emits B/m per stage every episode.
class EqualSplitPlanner final : public EpisodePlanner {
 public:
  EqualSplitPlanner(double budget, int m, InitialPlanMode mode)
      : budget_(budget), m_(m), mode_(mode) {}
  InitialPlanMode initial_mode() const override { return mode_; }
  BudgetPlan plan_for_episode(int, const PlannerState&) override {
    return equal_split_plan(budget_, m_);
  }

 private:
  double budget_;
  int m_;
  InitialPlanMode mode_;
};

/// Uniform bin grid 0..B with n_b levels.
std::vector<double> make_bin_grid(double budget, int n_b);

struct MckpResult {
  std::vector<double> allocation;
  std::vector<int> chosen_bins;
  double total_q = 0.0;
  bool feasible = true;
};

/// Multi-choice knapsack by dynamic programming over (stage, remaining
/// budget in bin-grid units): picks exactly one bin per stage maximizing
/// sum(Q) subject to the shared budget. Ties break toward smaller total
/// spend, then toward the lexicographically smallest bin-index vector.
/// Bin values must be commensurate with their smallest positive gap (true
/// for make_bin_grid grids).
MckpResult solve_mckp(const std::vector<std::vector<double>>& q_values,
                      std::span<const double> bins, double budget);

struct QMckpConfig {
  int bins = 40;
  double learning_rate = 3e-4;
  double epsilon = 0.1;  ///< initial exploration rate, decayed linearly to 0
  int enc_out = 64;
  int gru_hidden = 128;
  int head_hidden = 64;
  int iterations = 100;
  int advertisers_per_iteration = 64;
  int epochs = 2;
  int minibatch = 64;

  void validate() const;
};

/// Per-stage recurrent Q networks: each stage owns an encoder + GRU over its
/// own (rho_i, R_i, C_i) history and a head scoring every budget bin.
class QMckpModel {
 public:
  QMckpModel(int m, const QMckpConfig& config, std::uint64_t init_seed);
  QMckpModel(int m, const QMckpConfig& config, nn::ParamStore store);

  int stage_count() const { return m_; }
  int bin_count() const { return config_.bins; }
  const QMckpConfig& config() const { return config_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }

  nn::Tensor initial_hidden() const { return nn::Tensor(1, config_.gru_hidden); }
  void advance(int stage, nn::Tensor& hidden, std::span<const double, 3> features) const;
  std::vector<double> q_values(int stage, const nn::Tensor& hidden,
                               double scaled_budget) const;

  struct FitSample {
    int stage = 0;
    std::vector<std::array<double, 3>> sequence;  ///< per-episode features
    int bin = 0;
    double target = 0.0;  ///< realized stage return
  };

  /// One squared-error regression step on the chosen bins; returns the mean
  /// loss over the minibatch.
  double fit_minibatch(std::span<const FitSample> samples, double learning_rate);

  std::vector<std::pair<std::string, std::string>> checkpoint_meta() const;
  static QMckpConfig config_from_meta(
      const std::vector<std::pair<std::string, std::string>>& meta, int* m_out);

 private:
  struct StageNodes;
  StageNodes bind_stage(nn::Graph& g, const nn::BoundParams& bound, int stage) const;

  int m_;
  QMckpConfig config_;
  nn::ParamStore store_;
};

int nearest_bin(std::span<const double> bins, double value);

/// Episode planner: advances the per-stage recurrences, scores bins, and
/// either solves the MCKP or explores epsilon-greedily; decisions can be
/// recorded as fit samples for training.
class QMckpPlanner final : public EpisodePlanner {
 public:
  QMckpPlanner(const QMckpModel& model, double budget, InitialPlanMode mode, double epsilon,
               CounterRng explore_rng, std::vector<QMckpModel::FitSample>* sink);

  InitialPlanMode initial_mode() const override { return mode_; }
  BudgetPlan plan_for_episode(int episode_index, const PlannerState& state) override;
  void observe(int episode_index, const BudgetPlan& plan,
               const EpisodeOutcome& outcome) override;

 private:
  const QMckpModel& model_;
  double budget_;
  InitialPlanMode mode_;
  double epsilon_;
  CounterRng rng_;
  std::vector<QMckpModel::FitSample>* sink_;
  std::vector<double> bins_;
  std::vector<nn::Tensor> hidden_;
  std::vector<std::vector<std::array<double, 3>>> sequences_;
};

TrainResult train_qmckp(const EnvHandle& env, const QMckpConfig& config,
                        const BidderSpec& bidder_spec, InitialPlanMode initial_mode,
                        std::uint64_t seed, int workers, const TrainCallbacks& callbacks);

// ---------------------------------------------------------------------------
// HiBid'-style per-stage allocator

struct HibidConfig {
  int hidden = 64;
};

/// sigmoid(raw) * remaining, the squashed per-stage allocation.
double squash_allocation(double raw_action, double remaining);

/// Mean-action allocation for one stage from the 3-feature state
/// (stage number, consumed, remaining), all normalized by m/B.
double hibid_prime_allocate(const nn::FeedforwardPolicy& policy, int stage_index, int m,
                            double consumed, double remaining, double budget);

std::array<double, 3> hibid_state_features(int stage_index, int m, double consumed,
                                           double remaining, double budget);

/// Stage-by-stage planner; episodes are independent trajectories of m steps
/// with the stage return as reward.
class HibidPlanner final : public EpisodePlanner {
 public:
  HibidPlanner(const nn::FeedforwardPolicy& policy, double budget, int m,
               InitialPlanMode mode, bool stochastic, CounterRng action_rng,
               std::vector<TrajectorySample>* sink);

  InitialPlanMode initial_mode() const override { return mode_; }
  bool plans_per_stage() const override { return true; }
  BudgetPlan plan_for_episode(int, const PlannerState&) override;
  double allocate_stage(int episode_index, int stage_index, double consumed,
                        double remaining) override;
  void observe(int episode_index, const BudgetPlan& plan,
               const EpisodeOutcome& outcome) override;

 private:
  const nn::FeedforwardPolicy& policy_;
  double budget_;
  int m_;
  InitialPlanMode mode_;
  bool stochastic_;
  CounterRng rng_;
  std::vector<TrajectorySample>* sink_;
  TrajectorySample current_;
};

TrainResult train_hibid(const EnvHandle& env, const PPOConfig& ppo_config,
                        const HibidConfig& hibid_config, const BidderSpec& bidder_spec,
                        InitialPlanMode initial_mode, std::uint64_t seed, int workers,
                        const TrainCallbacks& callbacks);

}  // namespace bidlab
