#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bidlab/bidders.hpp"
#include "bidlab/domain.hpp"

namespace bidlab {

/// Euclidean projection onto {rho >= 0, sum(rho) <= B}: clip negatives and,
/// if the clipped sum still exceeds B, apply the sort-and-threshold
/// projection onto the sum(rho) = B face.
BudgetPlan project_onto_budget_simplex(std::span<const double> raw, double budget);

/// rho^t = project(rho^{t-1} + a_t). Each action component is optionally
/// clipped to +-component_clamp before the addition.
BudgetPlan apply_action(const BudgetPlan& prev_plan, std::span<const double> action,
                        double budget, std::optional<double> component_clamp = std::nullopt);

/// Increment in cumulative value over the previous episode.
double compute_reward(const EpisodeOutcome& current, const EpisodeOutcome& previous);

enum class InitialPlanMode { equal_split, first_episode_consumption };

InitialPlanMode initial_plan_mode_from_string(const std::string& s);
std::string to_string(InitialPlanMode mode);

/// equal_split: B/m per stage. first_episode_consumption: episode-0 per-stage
/// costs rescaled to sum to B (equal split when nothing was spent).
BudgetPlan initial_plan(InitialPlanMode mode, double budget, int m,
                        const EpisodeOutcome* first_episode = nullptr);

/// Planner network inputs: every budget-denominated quantity is multiplied by
/// m/B, so the scaled budget is always exactly m.
struct NormalizedState {
  std::vector<std::vector<double>> entries;  ///< per episode: [rho, R, C] * m/B
  double scaled_budget = 0.0;
};

NormalizedState normalize_state(const PlannerState& state, int m);

/// The 3m-vector (rho, R, C) * scale for one history entry.
std::vector<double> entry_features(const BudgetPlan& plan, const EpisodeOutcome& outcome,
                                   double scale);

/// Episode-by-episode budget planner driven by the framework loop below.
/// One instance serves one advertiser and may keep state across episodes.
class EpisodePlanner {
 public:
  virtual ~EpisodePlanner() = default;

  virtual InitialPlanMode initial_mode() const { return InitialPlanMode::equal_split; }

  /// Plan for episode t >= 1 given everything observed so far.
  virtual BudgetPlan plan_for_episode(int episode_index, const PlannerState& state) = 0;

  /// Planners that allocate stage by stage within an episode override these;
  /// plan_for_episode is then never called.
  virtual bool plans_per_stage() const { return false; }
  virtual double allocate_stage(int episode_index, int stage_index, double consumed,
                                double remaining) {
    (void)episode_index;
    (void)stage_index;
    (void)consumed;
    (void)remaining;
    throw std::logic_error("allocate_stage not implemented");
  }

  /// Observation hook after each episode completes.
  virtual void observe(int episode_index, const BudgetPlan& plan,
                       const EpisodeOutcome& outcome) {
    (void)episode_index;
    (void)plan;
    (void)outcome;
  }
};

using StreamSource = std::function<EpisodeStream(int episode_index)>;

struct AdvertiserRun {
  std::vector<BudgetPlan> plans;          ///< per episode
  std::vector<EpisodeOutcome> outcomes;   ///< per episode
  std::vector<double> rewards;            ///< per episode, rewards[0] = 0
  std::vector<double> vanilla_returns;    ///< empty unless with_vanilla
  std::vector<EpisodeOutcome> vanilla_outcomes;
};

/// Runs all episodes of one advertiser under the hierarchical framework:
/// episode 0 establishes the initial plan (running the bidder with native
/// whole-episode pacing in consumption mode), later episodes execute the
/// planner's plans with hard per-stage caps. When with_vanilla is set, a
/// second bidder instance runs every stream planner-free for comparison.
AdvertiserRun run_advertiser_episodes(EpisodePlanner& planner, double budget, int m,
                                      int episodes, const BidderSpec& bidder_spec,
                                      const StreamSource& streams, bool with_vanilla);

}  // namespace bidlab
