#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bidlab/domain.hpp"

namespace bidlab {

/// A single won impression, recorded when callers want per-impression
/// attribution (e.g. mapping a whole-episode run back onto stages).
struct Win {
  int offset = 0;  ///< position within the span the bidder ran on
  double value = 0.0;
  double price = 0.0;
};

/// Aggregate result of bidding through one stage under a stage budget.
struct StageOutcome {
  double won_value = 0.0;
  double cost = 0.0;
  int wins = 0;
  double final_lambda = 0.0;  ///< shading factor in effect at stage end
};

struct PidGains {
  double kp = 0.5;
  double ki = 0.05;
  double kd = 0.1;
  int window = 50;          ///< impressions per control interval
  double lambda_min = 1e-3;
  double lambda_max = 1e3;
};

enum class BidderKind { pid, lp_hindsight, fixed_shading };

BidderKind bidder_kind_from_string(const std::string& s);
std::string to_string(BidderKind kind);

struct BidderSpec {
  BidderKind kind = BidderKind::pid;
  PidGains gains;
  double initial_lambda = 1.0;  ///< shading used before any feedback exists
  double fixed_lambda = 0.0;    ///< fixed_shading: <=0 calibrates on episode 0
};

/// First-price win rule: the bid must strictly exceed the highest competing
/// bid.
inline bool win_rule(double bid, double price) { return bid > price; }

/// Optimal bid-scaling factor for a known stream: bidding lambda*v wins
/// exactly the affordable maximal-CPR prefix (strict wins inside, strict
/// losses outside). Zero-value impressions are unwinnable and ignored; when
/// everything is affordable the factor wins every impression strictly.
double hindsight_lambda(std::span<const double> values, std::span<const double> prices,
                        double budget);
double hindsight_lambda(std::span<const Impression> impressions, double budget);

/// Bids lambda*value on every impression under the remaining-budget
/// feasibility rule: a won impression whose price exceeds the remaining
/// budget is skipped, so cost never exceeds stage_budget.
StageOutcome run_fixed_lambda(std::span<const Impression> impressions, double stage_budget,
                              double lambda, std::vector<Win>* wins = nullptr);

/// PID pacing: bids lambda*value; after every control window the log shading
/// factor is nudged by K_P*e + K_I*sum(e) + K_D*delta(e), where e is the gap
/// between the linear spend target and actual spend, normalized by the stage
/// budget.
StageOutcome run_stage_pid(std::span<const Impression> impressions, double stage_budget,
                           const PidGains& gains, double initial_lambda,
                           std::vector<Win>* wins = nullptr);

/// LP-style bidding with a precomputed shading factor (typically the
/// hindsight optimum of the previous episode's stream for this stage).
StageOutcome run_stage_lp(std::span<const Impression> impressions, double stage_budget,
                          double lambda_prev, std::vector<Win>* wins = nullptr);

/// Stateful low-level auto-bidder driven stage by stage through successive
/// episodes of one advertiser. Instances are created per advertiser and own
/// all of their state, so independent advertisers can run concurrently.
class StageBidder {
 public:
  virtual ~StageBidder() = default;

  virtual void begin_episode(int episode_index) { (void)episode_index; }
  virtual StageOutcome run_stage(int episode_index, int stage_index,
                                 std::span<const Impression> impressions, double stage_budget,
                                 std::vector<Win>* win_log = nullptr) = 0;
  virtual void end_episode(int episode_index) { (void)episode_index; }
};

std::unique_ptr<StageBidder> make_bidder(const BidderSpec& spec, double advertiser_budget);

/// Runs the bidder stage by stage under a complete plan (hard per-stage
/// caps, no rollover of unspent budget).
EpisodeOutcome run_plan_on_stream(const EpisodeStream& stream, const BudgetPlan& plan,
                                  StageBidder& bidder, int episode_index);

/// Planner-free reference: one whole-episode run with the full budget and
/// bidder-native pacing, attributed back onto the stream's stages.
EpisodeOutcome run_vanilla_on_stream(const EpisodeStream& stream, double budget,
                                     StageBidder& bidder, int episode_index);

}  // namespace bidlab
