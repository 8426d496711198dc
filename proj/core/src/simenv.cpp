#include "bidlab/simenv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bidlab {

void SimConfig::validate() const {
  if (m < 1 || n < m) throw std::invalid_argument("SimConfig: need n >= m >= 1");
  if (episodes < 1) throw std::invalid_argument("SimConfig: need episodes >= 1");
  if (!(budget_low > 0.0) || budget_high < budget_low) {
    throw std::invalid_argument("SimConfig: need 0 < budget_low <= budget_high");
  }
  if (!(pareto_scale > 0.0)) throw std::invalid_argument("SimConfig: pareto_scale > 0");
  if (!(price_log_stddev >= 0.0) || !(stage_log_stddev >= 0.0)) {
    throw std::invalid_argument("SimConfig: negative lognormal stddev");
  }
}

Advertiser sample_advertiser(const SimConfig& config, CounterRng& rng) {
  Advertiser adv;
  adv.budget = rng.uniform(config.budget_low, config.budget_high);
  adv.c1 = rng.uniform01();
  adv.c2 = rng.uniform01();
  return adv;
}

double pareto_shape_at(const Advertiser& adv, int index, int n) {
  return 3.0 + adv.c2 * std::cos(2.0 * M_PI * static_cast<double>(index) / n - adv.c1);
}

std::vector<Impression> generate_impressions(const Advertiser& adv, const SimConfig& config,
                                             CounterRng& rng) {
  std::vector<Impression> imps(config.n);
  for (int i = 1; i <= config.n; ++i) {
    Impression& imp = imps[i - 1];
    imp.index = i;
    imp.price = rng.lognormal(config.price_log_mean, config.price_log_stddev);
    const double ratio = rng.pareto(pareto_shape_at(adv, i, config.n), config.pareto_scale);
    imp.value = ratio * imp.price;
  }
  return imps;
}

StageBoundaries partition_stages(int n, int m, CounterRng& rng) {
  if (m < 1 || n < m) throw std::invalid_argument("partition_stages: need n >= m >= 1");

  std::vector<double> weights(m);
  double total = 0.0;
  for (double& w : weights) {
    w = rng.lognormal(1.0, 0.5);
    total += w;
  }

  // Largest-remainder rounding of the normalized weights to integers
  // summing exactly to n.
  std::vector<int> lengths(m);
  std::vector<std::pair<double, int>> remainders(m);
  int assigned = 0;
  for (int s = 0; s < m; ++s) {
    const double exact = n * weights[s] / total;
    lengths[s] = static_cast<int>(std::floor(exact));
    remainders[s] = {exact - lengths[s], s};
    assigned += lengths[s];
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int r = 0; r < n - assigned; ++r) lengths[remainders[r % m].second] += 1;

  // Every stage gets at least one impression, stolen from the largest.
  for (int s = 0; s < m; ++s) {
    while (lengths[s] < 1) {
      const int largest = static_cast<int>(
          std::max_element(lengths.begin(), lengths.end()) - lengths.begin());
      lengths[largest] -= 1;
      lengths[s] += 1;
    }
  }
  return StageBoundaries{std::move(lengths)};
}

EpisodeStream make_episode_stream(const Advertiser& adv, const SimConfig& config,
                                  CounterRng rng) {
  EpisodeStream stream;
  CounterRng imp_rng = rng.split(0);
  CounterRng stage_rng = rng.split(1);
  stream.impressions = generate_impressions(adv, config, imp_rng);
  stream.stages = partition_stages(config.n, config.m, stage_rng);
  return stream;
}

EpisodeOutcome run_environment_episode(const Advertiser& adv, const BudgetPlan& plan,
                                       StageBidder& bidder, const SimConfig& config,
                                       CounterRng rng, int episode_index) {
  const EpisodeStream stream = make_episode_stream(adv, config, rng);
  return run_plan_on_stream(stream, plan, bidder, episode_index);
}

}  // namespace bidlab
