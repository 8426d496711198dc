#pragma once

#include <cstdint>

#include "bidlab/bidders.hpp"
#include "bidlab/domain.hpp"
#include "bidlab/rng.hpp"

namespace bidlab {

/// Parameters of the synthetic impression environment. Price and stage-weight
/// lognormals are parameterized by the mean/stddev of the underlying normal
/// in log space (so the median stage weight is e).
struct SimConfig {
  int n = 6000;      ///< impressions per episode
  int m = 6;         ///< stages per episode
  int episodes = 8;  ///< episodes per advertiser, indexed 0..episodes-1
  double budget_low = 100.0;
  double budget_high = 200.0;
  double price_log_mean = 0.1;
  double price_log_stddev = 0.1;
  double stage_log_mean = 1.0;
  double stage_log_stddev = 0.5;
  double pareto_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;  ///< throws std::invalid_argument on bad values
};

/// Budget ~ U[budget_low, budget_high], context ~ U[0,1]^2. The budget and
/// context stay fixed across all episodes of the advertiser.
Advertiser sample_advertiser(const SimConfig& config, CounterRng& rng);

/// Pareto shape for impression i (1-based): 3 + c2 * cos(2*pi*i/n - c1).
/// Always lies in [2, 4].
double pareto_shape_at(const Advertiser& adv, int index, int n);

/// Draws n impressions: price lognormal, CPR Pareto(shape_at(i), scale),
/// value = CPR * price. The CPR peak sits mid-episode, so middle impressions
/// are the most valuable per unit spend.
std::vector<Impression> generate_impressions(const Advertiser& adv, const SimConfig& config,
                                             CounterRng& rng);

/// Splits n impressions into m contiguous stages with lognormal weights,
/// largest-remainder rounding, and a minimum length of 1 per stage.
StageBoundaries partition_stages(int n, int m, CounterRng& rng);

/// Fresh stream + partition for one episode. Pure in (advertiser, rng key).
EpisodeStream make_episode_stream(const Advertiser& adv, const SimConfig& config,
                                  CounterRng rng);

/// Generates one episode and runs the bidder under the plan's hard per-stage
/// caps.
EpisodeOutcome run_environment_episode(const Advertiser& adv, const BudgetPlan& plan,
                                       StageBidder& bidder, const SimConfig& config,
                                       CounterRng rng, int episode_index = 0);

}  // namespace bidlab
