#include "bidlab/bidders.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bidlab {

BidderKind bidder_kind_from_string(const std::string& s) {
  if (s == "pid") return BidderKind::pid;
  if (s == "lp_hindsight") return BidderKind::lp_hindsight;
  if (s == "fixed_shading") return BidderKind::fixed_shading;
  throw std::invalid_argument("unknown bidder kind: " + s);
}

std::string to_string(BidderKind kind) {
  switch (kind) {
    case BidderKind::pid: return "pid";
    case BidderKind::lp_hindsight: return "lp_hindsight";
    case BidderKind::fixed_shading: return "fixed_shading";
  }
  return "?";
}

double hindsight_lambda(std::span<const double> values, std::span<const double> prices,
                        double budget) {
  if (values.size() != prices.size()) {
    throw std::invalid_argument("hindsight_lambda: values/prices size mismatch");
  }
  if (budget < 0.0) throw std::invalid_argument("hindsight_lambda: negative budget");

  struct Item {
    double ratio;  // v/p
    double price;
  };
  std::vector<Item> items;
  items.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    if (!(prices[i] > 0.0)) {
      throw std::invalid_argument("hindsight_lambda: price must be positive");
    }
    if (values[i] > 0.0) {
      items.push_back({values[i] / prices[i], prices[i]});
    }
  }
  // No winnable impression: any positive factor wins nothing and spends 0.
  if (items.empty()) return 1.0;

  // Descending CPR; ties go to the cheaper impression first.
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    return a.price < b.price;
  });

  size_t k = 0;
  double spent = 0.0;
  while (k < items.size() && spent + items[k].price <= budget) {
    spent += items[k].price;
    ++k;
  }

  if (k == items.size()) {
    // Everything is affordable: double the worst price/value ratio so every
    // bid strictly clears its price.
    double max_inv_ratio = 0.0;
    for (const Item& it : items) max_inv_ratio = std::max(max_inv_ratio, 1.0 / it.ratio);
    return 2.0 * max_inv_ratio;
  }
  if (k == 0) {
    // Nothing affordable: bid strictly below every price.
    return 0.5 / items.front().ratio;
  }
  return 2.0 / (items[k - 1].ratio + items[k].ratio);
}

double hindsight_lambda(std::span<const Impression> impressions, double budget) {
  std::vector<double> values(impressions.size());
  std::vector<double> prices(impressions.size());
  for (size_t i = 0; i < impressions.size(); ++i) {
    values[i] = impressions[i].value;
    prices[i] = impressions[i].price;
  }
  return hindsight_lambda(values, prices, budget);
}

StageOutcome run_fixed_lambda(std::span<const Impression> impressions, double stage_budget,
                              double lambda, std::vector<Win>* wins) {
  StageOutcome out;
  out.final_lambda = lambda;
  if (!(stage_budget > 0.0)) return out;
  double remaining = stage_budget;
  for (size_t i = 0; i < impressions.size(); ++i) {
    const Impression& imp = impressions[i];
    if (win_rule(lambda * imp.value, imp.price) && imp.price <= remaining) {
      remaining -= imp.price;
      out.cost += imp.price;
      out.won_value += imp.value;
      ++out.wins;
      if (wins) wins->push_back({static_cast<int>(i), imp.value, imp.price});
    }
  }
  return out;
}

StageOutcome run_stage_pid(std::span<const Impression> impressions, double stage_budget,
                           const PidGains& gains, double initial_lambda,
                           std::vector<Win>* wins) {
  StageOutcome out;
  const double log_min = std::log(gains.lambda_min);
  const double log_max = std::log(gains.lambda_max);
  double log_lambda = std::clamp(std::log(std::max(initial_lambda, gains.lambda_min)),
                                 log_min, log_max);
  out.final_lambda = std::exp(log_lambda);
  if (!(stage_budget > 0.0) || impressions.empty()) return out;

  const int n = static_cast<int>(impressions.size());
  const int window = std::max(1, gains.window);
  double spent = 0.0;
  double err_prev = 0.0;
  double err_sum = 0.0;

  for (int i = 0; i < n; ++i) {
    const Impression& imp = impressions[i];
    const double lambda = std::exp(log_lambda);
    if (win_rule(lambda * imp.value, imp.price) && imp.price <= stage_budget - spent) {
      spent += imp.price;
      out.cost += imp.price;
      out.won_value += imp.value;
      ++out.wins;
      if (wins) wins->push_back({i, imp.value, imp.price});
    }
    if ((i + 1) % window == 0) {
      // Linear spend target reaching the stage budget at stage end.
      const double target = stage_budget * static_cast<double>(i + 1) / n;
      const double err = (target - spent) / stage_budget;
      err_sum += err;
      log_lambda += gains.kp * err + gains.ki * err_sum + gains.kd * (err - err_prev);
      log_lambda = std::clamp(log_lambda, log_min, log_max);
      err_prev = err;
    }
  }
  out.final_lambda = std::exp(log_lambda);
  return out;
}

StageOutcome run_stage_lp(std::span<const Impression> impressions, double stage_budget,
                          double lambda_prev, std::vector<Win>* wins) {
  if (!(lambda_prev > 0.0)) {
    throw std::invalid_argument("run_stage_lp: lambda_prev must be positive");
  }
  return run_fixed_lambda(impressions, stage_budget, lambda_prev, wins);
}

namespace {

class PidStageBidder final : public StageBidder {
 public:
  explicit PidStageBidder(const BidderSpec& spec) : spec_(spec) {}

  StageOutcome run_stage(int, int, std::span<const Impression> impressions,
                         double stage_budget, std::vector<Win>* win_log) override {
    return run_stage_pid(impressions, stage_budget, spec_.gains, spec_.initial_lambda, win_log);
  }

 private:
  BidderSpec spec_;
};

/// Bids with the hindsight-optimal factor of the previous episode's stream
/// for the same stage (and the current stage budget). With no previous
/// stream yet it falls back to the configured initial shading.
class LpStageBidder final : public StageBidder {
 public:
  explicit LpStageBidder(const BidderSpec& spec) : initial_lambda_(spec.initial_lambda) {}

  void begin_episode(int) override {
    cur_values_.clear();
    cur_prices_.clear();
  }

  StageOutcome run_stage(int, int stage_index, std::span<const Impression> impressions,
                         double stage_budget, std::vector<Win>* win_log) override {
    double lambda = initial_lambda_;
    if (stage_index < static_cast<int>(prev_values_.size())) {
      lambda = hindsight_lambda(prev_values_[stage_index], prev_prices_[stage_index],
                                stage_budget);
    }
    auto& vals = cur_values_.emplace_back();
    auto& prcs = cur_prices_.emplace_back();
    vals.reserve(impressions.size());
    prcs.reserve(impressions.size());
    for (const Impression& imp : impressions) {
      vals.push_back(imp.value);
      prcs.push_back(imp.price);
    }
    return run_stage_lp(impressions, stage_budget, lambda, win_log);
  }

  void end_episode(int) override {
    prev_values_ = std::move(cur_values_);
    prev_prices_ = std::move(cur_prices_);
    cur_values_.clear();
    cur_prices_.clear();
  }

 private:
  double initial_lambda_;
  std::vector<std::vector<double>> prev_values_, prev_prices_;
  std::vector<std::vector<double>> cur_values_, cur_prices_;
};

/// Constant shading. When no factor is pinned in the spec, calibrates once
/// on the full episode-0 stream against the advertiser budget.
class FixedShadingBidder final : public StageBidder {
 public:
  FixedShadingBidder(const BidderSpec& spec, double advertiser_budget)
      : budget_(advertiser_budget),
        calibrate_(spec.fixed_lambda <= 0.0),
        lambda_(spec.fixed_lambda > 0.0 ? spec.fixed_lambda : spec.initial_lambda) {}

  StageOutcome run_stage(int episode_index, int, std::span<const Impression> impressions,
                         double stage_budget, std::vector<Win>* win_log) override {
    if (calibrate_ && episode_index == 0) {
      for (const Impression& imp : impressions) {
        ep0_values_.push_back(imp.value);
        ep0_prices_.push_back(imp.price);
      }
    }
    return run_fixed_lambda(impressions, stage_budget, lambda_, win_log);
  }

  void end_episode(int episode_index) override {
    if (calibrate_ && episode_index == 0 && !ep0_values_.empty()) {
      lambda_ = hindsight_lambda(ep0_values_, ep0_prices_, budget_);
      ep0_values_.clear();
      ep0_prices_.clear();
      calibrate_ = false;
    }
  }

 private:
  double budget_;
  bool calibrate_;
  double lambda_;
  std::vector<double> ep0_values_, ep0_prices_;
};

}  // namespace

std::unique_ptr<StageBidder> make_bidder(const BidderSpec& spec, double advertiser_budget) {
  switch (spec.kind) {
    case BidderKind::pid: return std::make_unique<PidStageBidder>(spec);
    case BidderKind::lp_hindsight: return std::make_unique<LpStageBidder>(spec);
    case BidderKind::fixed_shading:
      return std::make_unique<FixedShadingBidder>(spec, advertiser_budget);
  }
  throw std::invalid_argument("make_bidder: unknown kind");
}

EpisodeOutcome run_plan_on_stream(const EpisodeStream& stream, const BudgetPlan& plan,
                                  StageBidder& bidder, int episode_index) {
  const int m = stream.stages.stage_count();
  if (plan.stages() != m) {
    throw std::invalid_argument("run_plan_on_stream: plan/stage count mismatch");
  }
  EpisodeOutcome outcome;
  outcome.returns.assign(m, 0.0);
  outcome.costs.assign(m, 0.0);
  bidder.begin_episode(episode_index);
  for (int s = 0; s < m; ++s) {
    const StageOutcome so =
        bidder.run_stage(episode_index, s, stream.stage_span(s), plan.allocations()[s]);
    outcome.returns[s] = so.won_value;
    outcome.costs[s] = so.cost;
  }
  bidder.end_episode(episode_index);
  return outcome;
}

EpisodeOutcome run_vanilla_on_stream(const EpisodeStream& stream, double budget,
                                     StageBidder& bidder, int episode_index) {
  const int m = stream.stages.stage_count();
  EpisodeOutcome outcome;
  outcome.returns.assign(m, 0.0);
  outcome.costs.assign(m, 0.0);

  std::vector<Win> wins;
  bidder.begin_episode(episode_index);
  bidder.run_stage(episode_index, 0, stream.impressions, budget, &wins);
  bidder.end_episode(episode_index);

  // Attribute whole-episode wins back onto the stage partition.
  int stage = 0;
  int stage_end = stream.stages.lengths.empty() ? 0 : stream.stages.lengths[0];
  for (const Win& w : wins) {
    while (stage + 1 < m && w.offset >= stage_end) {
      ++stage;
      stage_end += stream.stages.lengths[stage];
    }
    outcome.returns[stage] += w.value;
    outcome.costs[stage] += w.price;
  }
  return outcome;
}

}  // namespace bidlab
