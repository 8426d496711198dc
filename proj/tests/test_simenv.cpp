#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bidlab/simenv.hpp"

using namespace bidlab;

TEST_SUITE_BEGIN("simenv");

TEST_CASE("counter rng is deterministic and split streams are independent") {
  CounterRng a(42);
  CounterRng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CounterRng c = CounterRng(42).split(1);
  CounterRng d = CounterRng(42).split(2);
  int equal = 0;
  for (int i = 0; i < 64; ++i) equal += c.next_u64() == d.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("advertiser sampling respects bounds and is seed-stable") {
  SimConfig cfg;
  CounterRng rng(7);
  CounterRng rng2(7);
  const Advertiser a = sample_advertiser(cfg, rng);
  const Advertiser b = sample_advertiser(cfg, rng2);
  CHECK(a.budget == b.budget);
  CHECK(a.c1 == b.c1);
  CHECK(a.c2 == b.c2);
  CHECK(a.budget >= 100.0);
  CHECK(a.budget <= 200.0);
  CHECK(a.c1 >= 0.0);
  CHECK(a.c1 <= 1.0);
  CHECK(a.c2 >= 0.0);
  CHECK(a.c2 <= 1.0);
}

TEST_CASE("budget mean over many samples matches the uniform law") {
  SimConfig cfg;
  CounterRng rng(99);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    CounterRng sub = rng.split(i);
    sum += sample_advertiser(cfg, sub).budget;
  }
  CHECK(sum / n == doctest::Approx(150.0).epsilon(1.0 / 150.0));
}

TEST_CASE("pareto shape: c2 = 0 flattens the cosine and range stays in [2,4]") {
  Advertiser flat;
  flat.budget = 100.0;
  flat.c1 = 0.4;
  flat.c2 = 0.0;
  for (int i = 1; i <= 100; ++i) CHECK(pareto_shape_at(flat, i, 100) == doctest::Approx(3.0));

  CounterRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Advertiser adv;
    adv.c1 = rng.uniform01();
    adv.c2 = rng.uniform01();
    for (int i = 1; i <= 200; ++i) {
      const double shape = pareto_shape_at(adv, i, 200);
      CHECK(shape >= 2.0);
      CHECK(shape <= 4.0);
    }
  }
}

TEST_CASE("pareto sampler mean matches shape/(shape-1) within 1%") {
  for (const double shape : {2.5, 3.0, 4.0}) {
    CounterRng rng(static_cast<std::uint64_t>(shape * 1000));
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += rng.pareto(shape, 1.0);
    const double expected = shape / (shape - 1.0);
    CHECK(sum / n == doctest::Approx(expected).epsilon(0.01));
  }
}

TEST_CASE("with c1 = 0 the shape dips mid-episode so mid CPR runs highest") {
  Advertiser adv;
  adv.c1 = 0.0;
  adv.c2 = 0.8;
  const int n = 6000;
  int argmin = 1;
  double lowest = 1e9;
  for (int i = 1; i <= n; ++i) {
    const double shape = pareto_shape_at(adv, i, n);
    if (shape < lowest) {
      lowest = shape;
      argmin = i;
    }
  }
  CHECK(std::abs(argmin - n / 2) <= n / 50);

  // Median CPR (robust to the heavy tail) of the middle third beats the
  // outer thirds across sampled streams.
  SimConfig cfg;
  cfg.n = 600;
  std::vector<double> mid, outer;
  for (int trial = 0; trial < 300; ++trial) {
    CounterRng rng = CounterRng(11).split(trial);
    const auto imps = generate_impressions(adv, cfg, rng);
    for (const auto& imp : imps) {
      const double ratio = imp.value / imp.price;
      if (imp.index > cfg.n / 3 && imp.index <= 2 * cfg.n / 3) {
        mid.push_back(ratio);
      } else {
        outer.push_back(ratio);
      }
    }
  }
  auto median = [](std::vector<double>& xs) {
    std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
    return xs[xs.size() / 2];
  };
  CHECK(median(mid) > median(outer));
}

TEST_CASE("stream generation is bit-stable under a fixed key") {
  SimConfig cfg;
  cfg.n = 500;
  Advertiser adv;
  adv.budget = 150.0;
  adv.c1 = 0.3;
  adv.c2 = 0.7;
  const EpisodeStream s1 = make_episode_stream(adv, cfg, CounterRng(5));
  const EpisodeStream s2 = make_episode_stream(adv, cfg, CounterRng(5));
  REQUIRE(s1.impressions.size() == s2.impressions.size());
  for (size_t i = 0; i < s1.impressions.size(); ++i) {
    CHECK(s1.impressions[i].value == s2.impressions[i].value);
    CHECK(s1.impressions[i].price == s2.impressions[i].price);
  }
  CHECK(s1.stages.lengths == s2.stages.lengths);
}

TEST_CASE("stage partition sums to n with every stage nonempty") {
  CounterRng rng(17);
  SUBCASE("single stage") {
    CounterRng r = rng.split(0);
    const StageBoundaries sb = partition_stages(100, 1, r);
    REQUIRE(sb.lengths.size() == 1);
    CHECK(sb.lengths[0] == 100);
  }
  SUBCASE("random sizes") {
    for (int trial = 0; trial < 200; ++trial) {
      CounterRng r = rng.split(trial);
      const int m = 1 + static_cast<int>(r.next_u64() % 12);
      const int n = m + static_cast<int>(r.next_u64() % 500);
      const StageBoundaries sb = partition_stages(n, m, r);
      CHECK(sb.total() == n);
      CHECK(*std::min_element(sb.lengths.begin(), sb.lengths.end()) >= 1);
    }
  }
  SUBCASE("n equals m") {
    CounterRng r = rng.split(999);
    const StageBoundaries sb = partition_stages(6, 6, r);
    CHECK(sb.lengths == std::vector<int>(6, 1));
  }
}

TEST_CASE("stage proportions are exchangeable with mean 1/m") {
  const int m = 6;
  const int n = 6000;
  std::vector<double> mean(m, 0.0);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    CounterRng rng = CounterRng(23).split(t);
    const StageBoundaries sb = partition_stages(n, m, rng);
    for (int s = 0; s < m; ++s) mean[s] += static_cast<double>(sb.lengths[s]) / n;
  }
  for (int s = 0; s < m; ++s) {
    CHECK(mean[s] / trials == doctest::Approx(1.0 / m).epsilon(0.06));
  }
}

TEST_CASE("zero plan wins nothing and costs nothing") {
  SimConfig cfg;
  cfg.n = 300;
  cfg.m = 3;
  Advertiser adv;
  adv.budget = 150.0;
  adv.c1 = 0.5;
  adv.c2 = 0.5;
  BidderSpec spec;
  auto bidder = make_bidder(spec, adv.budget);
  const BudgetPlan plan(std::vector<double>(3, 0.0), adv.budget);
  const EpisodeOutcome out = run_environment_episode(adv, plan, *bidder, cfg, CounterRng(1));
  CHECK(out.total_return() == 0.0);
  CHECK(out.total_cost() == 0.0);
  CHECK(out.returns.size() == 3);
}

TEST_CASE("episode cost never exceeds the plan total") {
  SimConfig cfg;
  cfg.n = 400;
  cfg.m = 4;
  for (int trial = 0; trial < 20; ++trial) {
    CounterRng rng = CounterRng(31).split(trial);
    Advertiser adv = sample_advertiser(cfg, rng);
    BidderSpec spec;
    auto bidder = make_bidder(spec, adv.budget);
    const BudgetPlan plan(std::vector<double>(4, adv.budget / 4), adv.budget);
    const EpisodeOutcome out =
        run_environment_episode(adv, plan, *bidder, cfg, rng.split(1000));
    CHECK(out.total_cost() <= adv.budget + 1e-9);
    for (size_t s = 0; s < out.costs.size(); ++s) {
      CHECK(out.costs[s] <= plan.allocations()[s] + 1e-12);
    }
  }
}

TEST_CASE("unconstrained shading wins the whole stream") {
  SimConfig cfg;
  cfg.n = 300;
  cfg.m = 3;
  Advertiser adv;
  adv.budget = 150.0;
  adv.c1 = 0.2;
  adv.c2 = 0.6;
  const EpisodeStream stream = make_episode_stream(adv, cfg, CounterRng(77));
  double total_price = 0.0;
  for (const auto& imp : stream.impressions) total_price += imp.price;

  BidderSpec spec;
  spec.kind = BidderKind::fixed_shading;
  spec.fixed_lambda = 1e9;  // bid above any price
  auto bidder = make_bidder(spec, total_price * 2);
  std::vector<double> alloc(3);
  // Per-stage budgets generous enough to afford every impression.
  for (int s = 0; s < 3; ++s) alloc[s] = total_price;
  const BudgetPlan plan(alloc, total_price * 3);
  const EpisodeOutcome out = run_plan_on_stream(stream, plan, *bidder, 0);
  CHECK(out.total_return() == doctest::Approx(stream.total_value()).epsilon(1e-12));
}

TEST_SUITE_END();
