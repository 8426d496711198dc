#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bidlab/config.hpp"
#include "bidlab/hier.hpp"
#include "bidlab/ppo.hpp"
#include "bidlab/rng.hpp"

namespace bidlab {

/// Training-side and held-out advertiser spaces draw from disjoint rng
/// domains of the same master seed.
EnvHandle make_environment(const ExperimentConfig& config, bool held_out);

/// Per-advertiser planner instances for evaluation; lane feeds the rng.
using PlannerFactory =
    std::function<std::unique_ptr<EpisodePlanner>(const Advertiser& adv, std::uint64_t lane)>;

struct EvalData {
  int episodes = 0;
  int m = 0;
  std::vector<std::vector<double>> planner_returns;          ///< [advertiser][episode]
  std::vector<std::vector<double>> vanilla_returns;          ///< [advertiser][episode]
  std::vector<std::vector<std::vector<double>>> plan_props;  ///< [adv][episode][stage]

  /// Per-advertiser planner-minus-vanilla difference at one episode index.
  std::vector<double> improvements_at(int episode_index) const;
  double mean_improvement_at(int episode_index) const;
  double mean_return_at(int episode_index) const;
};

/// Runs `advertisers` held-out advertisers under the planner and, on the same
/// streams, under the planner-free bidder. An empty factory means
/// planner = none: the vanilla series doubles as the planner series and the
/// emitted proportions are realized cost shares.
EvalData evaluate_planner(const ExperimentConfig& config, const EnvHandle& env,
                          const PlannerFactory& factory, int advertisers, int workers);

void write_eval_csvs(const EvalData& data, const std::string& dir);

struct BootstrapCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap confidence interval for the mean (95% by default).
BootstrapCi bootstrap_mean_ci(std::span<const double> xs, int resamples, CounterRng rng,
                              double coverage = 0.95);

struct TrainOutputs {
  std::string checkpoint_final;
  std::string checkpoint_best;
  std::string metrics_path;
  std::string manifest_path;
};

/// Trains the configured planner and writes metrics, checkpoints, and the
/// run manifest under out_dir. Rejects planners with nothing to train.
TrainOutputs run_train(const ExperimentConfig& config, const std::string& out_dir,
                       int workers);

/// Loads the checkpoint (when the planner needs one), evaluates against the
/// vanilla reference, and writes the eval CSV set plus a manifest.
EvalData run_eval(const ExperimentConfig& config, const std::string& checkpoint_path,
                  const std::string& out_dir, int workers);

struct SweepRow {
  int m = 0;
  std::string run_id;
  double last_episode_improvement = 0.0;
  BootstrapCi ci;
};

/// Train + eval once per stage count; emits sweep_stages.csv under out_dir.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, std::span<const int> m_values,
                                const std::string& out_dir, int workers);

/// Writes synthetic streams in the replay log format.
void run_export_logs(const ExperimentConfig& config, const std::string& out_path);

/// CLI entry point (verbs: train, eval, sweep-stages, export-logs).
/// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bidlab
