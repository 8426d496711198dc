#include "bidlab/hier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bidlab {

BudgetPlan project_onto_budget_simplex(std::span<const double> raw, double budget) {
  if (!(budget > 0.0)) {
    throw std::invalid_argument("project_onto_budget_simplex: budget must be positive");
  }
  if (raw.empty()) {
    throw std::invalid_argument("project_onto_budget_simplex: empty input");
  }
  for (double x : raw) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("project_onto_budget_simplex: non-finite input");
    }
  }

  std::vector<double> clipped(raw.begin(), raw.end());
  for (double& x : clipped) x = std::max(x, 0.0);
  double sum = std::accumulate(clipped.begin(), clipped.end(), 0.0);
  if (sum <= budget) {
    return BudgetPlan(std::move(clipped), budget);
  }

  // Sort-and-threshold projection onto the sum = B face.
  std::vector<double> sorted = clipped;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double theta = 0.0;
  for (size_t j = 0; j < sorted.size(); ++j) {
    prefix += sorted[j];
    const double candidate = (prefix - budget) / static_cast<double>(j + 1);
    if (j + 1 == sorted.size() || sorted[j + 1] <= candidate) {
      theta = candidate;
      break;
    }
  }

  std::vector<double> projected(clipped.size());
  for (size_t i = 0; i < clipped.size(); ++i) {
    projected[i] = std::max(clipped[i] - theta, 0.0);
  }

  // Floating-point guard: nudge the sum back under B if rounding pushed it
  // over.
  for (int pass = 0; pass < 4; ++pass) {
    const double s = std::accumulate(projected.begin(), projected.end(), 0.0);
    if (s <= budget) break;
    const size_t largest = static_cast<size_t>(
        std::max_element(projected.begin(), projected.end()) - projected.begin());
    projected[largest] = std::max(projected[largest] - (s - budget), 0.0);
  }
  return BudgetPlan(std::move(projected), budget);
}

BudgetPlan apply_action(const BudgetPlan& prev_plan, std::span<const double> action,
                        double budget, std::optional<double> component_clamp) {
  if (static_cast<size_t>(prev_plan.stages()) != action.size()) {
    throw std::invalid_argument("apply_action: plan/action dimension mismatch");
  }
  std::vector<double> moved(prev_plan.allocations());
  for (size_t i = 0; i < action.size(); ++i) {
    double a = action[i];
    if (!std::isfinite(a)) throw std::invalid_argument("apply_action: non-finite action");
    if (component_clamp) a = std::clamp(a, -*component_clamp, *component_clamp);
    moved[i] += a;
  }
  return project_onto_budget_simplex(moved, budget);
}

double compute_reward(const EpisodeOutcome& current, const EpisodeOutcome& previous) {
  if (current.returns.size() != previous.returns.size()) {
    throw std::invalid_argument("compute_reward: outcome length mismatch");
  }
  return current.total_return() - previous.total_return();
}

InitialPlanMode initial_plan_mode_from_string(const std::string& s) {
  if (s == "equal_split") return InitialPlanMode::equal_split;
  if (s == "first_episode_consumption") return InitialPlanMode::first_episode_consumption;
  throw std::invalid_argument("unknown initial plan mode: " + s);
}

std::string to_string(InitialPlanMode mode) {
  return mode == InitialPlanMode::equal_split ? "equal_split" : "first_episode_consumption";
}

BudgetPlan initial_plan(InitialPlanMode mode, double budget, int m,
                        const EpisodeOutcome* first_episode) {
  if (m < 1) throw std::invalid_argument("initial_plan: m >= 1 required");
  if (mode == InitialPlanMode::first_episode_consumption) {
    if (first_episode == nullptr) {
      throw std::invalid_argument("initial_plan: consumption mode needs the first episode");
    }
    if (static_cast<int>(first_episode->costs.size()) != m) {
      throw std::invalid_argument("initial_plan: outcome has wrong stage count");
    }
    const double spent = first_episode->total_cost();
    if (spent > 0.0) {
      std::vector<double> alloc(first_episode->costs);
      const double scale = budget / spent;
      for (double& a : alloc) a *= scale;
      return project_onto_budget_simplex(alloc, budget);
    }
    // Nothing was spent: fall through to an equal split.
  }
  return BudgetPlan(std::vector<double>(m, budget / m), budget);
}

std::vector<double> entry_features(const BudgetPlan& plan, const EpisodeOutcome& outcome,
                                   double scale) {
  const int m = plan.stages();
  std::vector<double> feats;
  feats.reserve(3 * m);
  for (int i = 0; i < m; ++i) feats.push_back(plan.allocations()[i] * scale);
  for (int i = 0; i < m; ++i) feats.push_back(outcome.returns[i] * scale);
  for (int i = 0; i < m; ++i) feats.push_back(outcome.costs[i] * scale);
  return feats;
}

NormalizedState normalize_state(const PlannerState& state, int m) {
  if (!(state.budget > 0.0)) throw std::invalid_argument("normalize_state: budget > 0");
  NormalizedState ns;
  const double scale = static_cast<double>(m) / state.budget;
  ns.scaled_budget = state.budget * scale;
  ns.entries.reserve(state.history.size());
  for (const HistoryEntry& entry : state.history) {
    ns.entries.push_back(entry_features(entry.plan, entry.outcome, scale));
  }
  return ns;
}

AdvertiserRun run_advertiser_episodes(EpisodePlanner& planner, double budget, int m,
                                      int episodes, const BidderSpec& bidder_spec,
                                      const StreamSource& streams, bool with_vanilla) {
  AdvertiserRun run;
  auto bidder = make_bidder(bidder_spec, budget);
  std::unique_ptr<StageBidder> vanilla_bidder;
  if (with_vanilla) vanilla_bidder = make_bidder(bidder_spec, budget);

  PlannerState state;
  state.budget = budget;

  for (int e = 0; e < episodes; ++e) {
    const EpisodeStream stream = streams(e);

    BudgetPlan plan(std::vector<double>(static_cast<size_t>(m), 0.0), budget);
    EpisodeOutcome outcome;
    if (e == 0) {
      if (planner.initial_mode() == InitialPlanMode::first_episode_consumption) {
        // Episode 0 runs planner-free; its per-stage consumption seeds the
        // plan the planner will adjust from episode 1 on.
        outcome = run_vanilla_on_stream(stream, budget, *bidder, e);
        plan = initial_plan(InitialPlanMode::first_episode_consumption, budget, m, &outcome);
      } else {
        plan = initial_plan(InitialPlanMode::equal_split, budget, m);
        outcome = run_plan_on_stream(stream, plan, *bidder, e);
      }
    } else if (planner.plans_per_stage()) {
      std::vector<double> alloc(static_cast<size_t>(m), 0.0);
      outcome.returns.assign(m, 0.0);
      outcome.costs.assign(m, 0.0);
      double consumed = 0.0;
      double remaining = budget;
      bidder->begin_episode(e);
      for (int s = 0; s < m; ++s) {
        alloc[s] = planner.allocate_stage(e, s, consumed, remaining);
        alloc[s] = std::clamp(alloc[s], 0.0, remaining);
        const StageOutcome so = bidder->run_stage(e, s, stream.stage_span(s), alloc[s]);
        outcome.returns[s] = so.won_value;
        outcome.costs[s] = so.cost;
        consumed += so.cost;
        remaining -= alloc[s];
      }
      bidder->end_episode(e);
      plan = BudgetPlan(std::move(alloc), budget);
    } else {
      plan = planner.plan_for_episode(e, state);
      outcome = run_plan_on_stream(stream, plan, *bidder, e);
    }

    run.rewards.push_back(e == 0 ? 0.0 : compute_reward(outcome, run.outcomes.back()));
    run.plans.push_back(plan);
    run.outcomes.push_back(outcome);
    planner.observe(e, plan, outcome);
    state.history.push_back(HistoryEntry{plan, outcome});

    if (with_vanilla) {
      const EpisodeOutcome v = run_vanilla_on_stream(stream, budget, *vanilla_bidder, e);
      run.vanilla_returns.push_back(v.total_return());
      run.vanilla_outcomes.push_back(v);
    }
  }
  return run;
}

}  // namespace bidlab
