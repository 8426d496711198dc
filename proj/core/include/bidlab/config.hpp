#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bidlab/baselines.hpp"
#include "bidlab/bidders.hpp"
#include "bidlab/hier.hpp"
#include "bidlab/ppo.hpp"
#include "bidlab/simenv.hpp"

namespace bidlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EnvType { simenv, replay };
enum class PlannerKind { abplanner, equal_split, qmckp, hibid_prime, none };

PlannerKind planner_kind_from_string(const std::string& s);
std::string to_string(PlannerKind kind);

struct ReplayEnvConfig {
  std::string log_path;
  int m = 24;
  int episodes = 8;
  double budget = 150.0;
  std::string budgets_file;  ///< optional per-advertiser budgets CSV
  double holdout_fraction = 0.1;
};

struct PlannerSection {
  PlannerKind kind = PlannerKind::abplanner;
  std::string initial_plan = "auto";  ///< auto | equal_split | first_episode_consumption
  bool action_clamp = true;
};

struct NetworkSection {
  int enc_out = 64;
  int gru_hidden = 128;
  int head_hidden = 64;
};

struct EvalSection {
  int advertisers = 500;
  bool stochastic = false;
};

struct ExportSection {
  int advertisers = 2;
  int episodes = 2;
  std::string start_day = "2024-01-01";
};

struct SweepSection {
  std::vector<int> m_values = {3, 4, 5, 6, 9, 12};
};

/// Everything a run needs, mirrored one to one by the JSON config file
/// documented in docs/config.md.
struct ExperimentConfig {
  int version = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "runs/out";
  EnvType env_type = EnvType::simenv;
  SimConfig sim;
  ReplayEnvConfig replay;
  BidderSpec bidder;
  PlannerSection planner;
  PPOConfig ppo;
  QMckpConfig qmckp;
  HibidConfig hibid;
  NetworkSection network;
  EvalSection eval;
  ExportSection export_logs;
  SweepSection sweep;

  int stage_count() const { return env_type == EnvType::simenv ? sim.m : replay.m; }
  int episode_count() const {
    return env_type == EnvType::simenv ? sim.episodes : replay.episodes;
  }
  /// "auto" resolves per bidder: the PID and fixed-shading bidders seed the
  /// plan from first-episode consumption, the LP bidder splits evenly.
  InitialPlanMode resolved_initial_mode() const;

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
/// Round-trips the resolved config for run manifests.
std::string config_to_json_string(const ExperimentConfig& config, int indent = 2);

}  // namespace bidlab
