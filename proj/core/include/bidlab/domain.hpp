#pragma once

#include <span>
#include <string>
#include <vector>

namespace bidlab {

/// One auction opportunity: the value of showing the ad and the highest
/// competing bid (which is what the winner pays).
struct Impression {
  int index = 0;       ///< 1-based position in the episode stream
  double value = 0.0;  ///< nonnegative, abstract value units
  double price = 0.0;  ///< positive, currency units
};

/// Cost-performance ratio value/price. Throws if price <= 0.
double cpr(const Impression& imp);

struct Advertiser {
  std::string id;
  double budget = 0.0;  ///< B > 0, fixed across all episodes of the advertiser
  double c1 = 0.0;      ///< latent context, both components in [0, 1]
  double c2 = 0.0;
};

/// Per-stage budget allocations rho, feasible when rho_i >= 0 and
/// sum(rho) <= B. Constructors reject infeasible vectors.
class BudgetPlan {
 public:
  BudgetPlan(std::vector<double> allocations, double budget);

  const std::vector<double>& allocations() const { return allocations_; }
  double budget() const { return budget_; }
  int stages() const { return static_cast<int>(allocations_.size()); }
  double total() const;

  /// Feasibility test used by the constructor; allows a 1e-9-scale slack so
  /// projected plans whose sums round a hair above B still pass.
  static bool feasible(std::span<const double> allocations, double budget);

 private:
  std::vector<double> allocations_;
  double budget_ = 0.0;
};

/// Contiguous stage lengths summing to the episode length. The synthetic
/// environment guarantees every length >= 1; log replay permits empty stages.
struct StageBoundaries {
  std::vector<int> lengths;

  int stage_count() const { return static_cast<int>(lengths.size()); }
  int total() const;
  /// Start offset of a stage within the episode stream.
  int offset(int stage) const;
};

/// Cumulative value and cost realized by the low-level bidder, one entry per
/// stage.
struct EpisodeOutcome {
  std::vector<double> returns;
  std::vector<double> costs;

  double total_return() const;
  double total_cost() const;
};

/// One episode's worth of planner-visible history.
struct HistoryEntry {
  BudgetPlan plan;
  EpisodeOutcome outcome;
};

/// What the planner sees before deciding: the budget plus the plans and
/// outcomes of all preceding episodes.
struct PlannerState {
  double budget = 0.0;
  std::vector<HistoryEntry> history;
};

struct TrajectoryStep {
  PlannerState state;
  std::vector<double> action;
  double reward = 0.0;
  PlannerState next_state;
};

/// Sequence of planner decisions over the successive episodes of one
/// advertiser.
struct Trajectory {
  std::vector<TrajectoryStep> steps;
};

/// A generated or replayed episode: the impression stream plus its stage
/// partition.
struct EpisodeStream {
  std::vector<Impression> impressions;
  StageBoundaries stages;

  std::span<const Impression> stage_span(int stage) const;
  double total_value() const;
};

}  // namespace bidlab
