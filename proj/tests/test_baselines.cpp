#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bidlab/baselines.hpp"
#include "bidlab/simenv.hpp"
#include "oracles.hpp"

using namespace bidlab;

TEST_SUITE_BEGIN("baselines");

TEST_CASE("equal split") {
  const BudgetPlan plan = equal_split_plan(120.0, 6);
  for (double a : plan.allocations()) CHECK(a == doctest::Approx(20.0));
  CHECK(plan.total() == doctest::Approx(120.0));
  CHECK(equal_split_plan(50.0, 1).allocations()[0] == doctest::Approx(50.0));
}

TEST_CASE("mckp: worked tie-breaking example") {
  const std::vector<std::vector<double>> q = {{0.0, 5.0, 6.0}, {0.0, 4.0, 9.0}};
  const std::vector<double> bins = {0.0, 1.0, 2.0};
  const MckpResult result = solve_mckp(q, bins, 2.0);
  CHECK(result.feasible);
  CHECK(result.total_q == doctest::Approx(9.0));
  // (0,2) and (1,1) tie on q and spend; lexicographic order picks (0,2).
  CHECK(result.chosen_bins == std::vector<int>{0, 2});
}

TEST_CASE("mckp: flat q collapses to the smallest bins") {
  const std::vector<std::vector<double>> q = {{2.0, 2.0, 2.0}, {2.0, 2.0, 2.0}};
  const std::vector<double> bins = {0.0, 1.0, 2.0};
  const MckpResult result = solve_mckp(q, bins, 4.0);
  CHECK(result.chosen_bins == std::vector<int>{0, 0});
}

TEST_CASE("mckp: slack budget reduces to per-stage argmax") {
  const std::vector<std::vector<double>> q = {{1.0, 7.0, 3.0}, {2.0, 2.5, 9.0}};
  const std::vector<double> bins = {0.0, 1.0, 2.0};
  const MckpResult result = solve_mckp(q, bins, 100.0);
  CHECK(result.chosen_bins == std::vector<int>{1, 2});
}

TEST_CASE("mckp: infeasible instances return the all-smallest plan flagged") {
  const std::vector<std::vector<double>> q = {{1.0, 2.0}, {1.0, 2.0}};
  const std::vector<double> bins = {1.0, 2.0};
  const MckpResult result = solve_mckp(q, bins, 1.5);
  CHECK_FALSE(result.feasible);
  CHECK(result.allocation == std::vector<double>{1.0, 1.0});
}

TEST_CASE("mckp matches exhaustive enumeration on random instances") {
  CounterRng rng(600);
  for (int trial = 0; trial < 200; ++trial) {
    CounterRng sub = rng.split(trial);
    const int m = 1 + sub.uniform_int(0, 3);
    const int n_b = 2 + sub.uniform_int(0, 4);
    const double budget = sub.uniform(0.5, 4.0);
    // Uniform grids (as the planner builds) plus scaled integer grids.
    std::vector<double> bins;
    if (sub.uniform01() < 0.5) {
      bins = make_bin_grid(budget * sub.uniform(0.5, 1.5), n_b);
    } else {
      const double unit = sub.uniform(0.1, 0.8);
      for (int j = 0; j < n_b; ++j) bins.push_back(unit * j);
    }
    std::vector<std::vector<double>> q(m, std::vector<double>(n_b));
    for (auto& row : q) {
      for (double& v : row) v = sub.uniform(-2.0, 8.0);
    }
    const MckpResult dp = solve_mckp(q, bins, budget);
    const auto brute = oracles::mckp_enumerate(q, bins, budget);
    if (!brute.feasible) {
      CHECK_FALSE(dp.feasible);
      continue;
    }
    REQUIRE(dp.feasible);
    CHECK(dp.total_q == doctest::Approx(brute.total_q).epsilon(1e-12));
    double spend = std::accumulate(dp.allocation.begin(), dp.allocation.end(), 0.0);
    CHECK(spend <= budget + 1e-9);
  }
}

TEST_CASE("nearest bin mapping") {
  const std::vector<double> bins = {0.0, 1.0, 2.0, 3.0};
  CHECK(nearest_bin(bins, -5.0) == 0);
  CHECK(nearest_bin(bins, 0.4) == 0);
  CHECK(nearest_bin(bins, 1.6) == 2);
  CHECK(nearest_bin(bins, 99.0) == 3);
}

namespace {

QMckpConfig tiny_qmckp_config() {
  QMckpConfig cfg;
  cfg.bins = 5;
  cfg.enc_out = 8;
  cfg.gru_hidden = 8;
  cfg.head_hidden = 8;
  cfg.learning_rate = 1e-2;
  return cfg;
}

}  // namespace

TEST_CASE("qmckp regression converges to a constant target on the visited bin") {
  const QMckpConfig cfg = tiny_qmckp_config();
  QMckpModel model(2, cfg, 601);

  QMckpModel::FitSample sample;
  sample.stage = 1;
  sample.sequence = {{1.0, 0.5, 0.25}, {0.9, 0.6, 0.30}};
  sample.bin = 3;
  sample.target = 5.0;

  // Record the untouched output-layer entries before fitting.
  const nn::Tensor w2_before = model.params().value("s1.head.W2");
  const nn::Tensor b2_before = model.params().value("s1.head.b2");

  std::vector<QMckpModel::FitSample> batch{sample};
  double last_loss = 0.0;
  for (int step = 0; step < 400; ++step) {
    last_loss = model.fit_minibatch(batch, cfg.learning_rate);
  }
  CHECK(last_loss < 0.01);

  nn::Tensor h = model.initial_hidden();
  for (const auto& feats : sample.sequence) model.advance(1, h, feats);
  const std::vector<double> q = model.q_values(1, h, 2.0);
  CHECK(q[sample.bin] == doctest::Approx(5.0).epsilon(0.05));

  // Output-layer weights of unvisited bins never receive a gradient.
  const nn::Tensor& w2_after = model.params().value("s1.head.W2");
  const nn::Tensor& b2_after = model.params().value("s1.head.b2");
  for (int r = 0; r < w2_after.rows; ++r) {
    for (int c = 0; c < w2_after.cols; ++c) {
      if (c == sample.bin) continue;
      CHECK(w2_after.at(r, c) == w2_before.at(r, c));
    }
  }
  for (int c = 0; c < b2_after.cols; ++c) {
    if (c == sample.bin) continue;
    CHECK(b2_after.at(0, c) == b2_before.at(0, c));
  }
}

TEST_CASE("qmckp regression loss decreases on a stationary dataset") {
  const QMckpConfig cfg = tiny_qmckp_config();
  QMckpModel model(1, cfg, 602);
  CounterRng rng(603);
  std::vector<QMckpModel::FitSample> dataset;
  for (int i = 0; i < 32; ++i) {
    QMckpModel::FitSample s;
    s.stage = 0;
    const int len = 1 + rng.uniform_int(0, 3);
    for (int t = 0; t < len; ++t) {
      s.sequence.push_back({rng.uniform01(), rng.uniform01(), rng.uniform01()});
    }
    s.bin = rng.uniform_int(0, cfg.bins - 1);
    s.target = 2.0 * s.sequence.back()[0] + 0.5 * s.bin;
    dataset.push_back(std::move(s));
  }
  const double first = model.fit_minibatch(dataset, cfg.learning_rate);
  double last = first;
  for (int step = 0; step < 60; ++step) last = model.fit_minibatch(dataset, cfg.learning_rate);
  CHECK(last < first);
}

TEST_CASE("qmckp planner emits feasible bin-valued plans") {
  const QMckpConfig cfg = tiny_qmckp_config();
  QMckpModel model(3, cfg, 604);
  const double budget = 90.0;
  QMckpPlanner planner(model, budget, InitialPlanMode::equal_split, 0.0, CounterRng(605),
                       nullptr);

  PlannerState state;
  state.budget = budget;
  EpisodeOutcome out;
  out.returns = {1.0, 2.0, 3.0};
  out.costs = {10.0, 10.0, 10.0};
  state.history.push_back({equal_split_plan(budget, 3), out});

  const BudgetPlan plan = planner.plan_for_episode(1, state);
  const auto bins = make_bin_grid(budget, cfg.bins);
  double sum = 0.0;
  for (double a : plan.allocations()) {
    CHECK(nearest_bin(bins, a) >= 0);  // every allocation sits on the grid
    bool on_grid = false;
    for (double b : bins) on_grid = on_grid || std::fabs(b - a) < 1e-9;
    CHECK(on_grid);
    sum += a;
  }
  CHECK(sum <= budget + 1e-9);
}

TEST_CASE("hibid squashing and the zero-remaining edge") {
  CHECK(squash_allocation(0.0, 10.0) == doctest::Approx(5.0));
  CHECK(squash_allocation(100.0, 10.0) == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(squash_allocation(3.0, 0.0) == 0.0);

  nn::FeedforwardSizes sizes;
  sizes.obs_dim = 3;
  sizes.action_dim = 1;
  sizes.hidden = 8;
  nn::FeedforwardPolicy policy(sizes, 606);
  CHECK(hibid_prime_allocate(policy, 2, 6, 50.0, 0.0, 100.0) == 0.0);
  const double alloc = hibid_prime_allocate(policy, 2, 6, 10.0, 40.0, 100.0);
  CHECK(alloc >= 0.0);
  CHECK(alloc <= 40.0);
}

TEST_CASE("hibid planner never exceeds the budget across stages") {
  nn::FeedforwardSizes sizes;
  sizes.obs_dim = 3;
  sizes.action_dim = 1;
  sizes.hidden = 8;
  nn::FeedforwardPolicy policy(sizes, 607);

  SimConfig sim;
  sim.n = 200;
  sim.m = 4;
  sim.episodes = 3;
  Advertiser adv;
  adv.budget = 150.0;
  adv.c1 = 0.5;
  adv.c2 = 0.5;
  const CounterRng base(608);
  StreamSource streams = [&](int e) {
    return make_episode_stream(adv, sim, base.split(e));
  };
  HibidPlanner planner(policy, adv.budget, sim.m, InitialPlanMode::equal_split, true,
                       CounterRng(609), nullptr);
  const AdvertiserRun run = run_advertiser_episodes(planner, adv.budget, sim.m, sim.episodes,
                                                    BidderSpec{}, streams, false);
  for (const auto& plan : run.plans) {
    CHECK(plan.total() <= adv.budget * (1.0 + 1e-9));
  }
}

TEST_CASE("hibid learns to pour budget into the only valuable stage") {
  // Stage 2 of 3 carries all the value; stages 1 and 3 are worthless.
  const int m = 3;
  const double budget = 100.0;
  auto make_stream = []() {
    EpisodeStream stream;
    int index = 1;
    for (int s = 0; s < 3; ++s) {
      for (int i = 0; i < 300; ++i) {
        const double value = s == 1 ? 2.0 : 0.0;
        stream.impressions.push_back({index++, value, 1.0});
      }
    }
    stream.stages = StageBoundaries{{300, 300, 300}};
    return stream;
  };

  EnvHandle env;
  env.m = m;
  env.episodes = 2;
  env.max_advertisers = -1;
  env.advertiser_at = [budget](std::uint64_t lane) {
    Advertiser adv;
    adv.id = "synthetic-" + std::to_string(lane);
    adv.budget = budget;
    return adv;
  };
  env.streams_for = [make_stream](const Advertiser&, std::uint64_t) {
    return StreamSource([make_stream](int) { return make_stream(); });
  };

  BidderSpec bidder;
  bidder.kind = BidderKind::fixed_shading;
  bidder.fixed_lambda = 1.5;  // wins every valuable impression it can afford

  PPOConfig cfg;
  cfg.learning_rate = 5e-3;
  cfg.trajectories_per_iteration = 32;
  cfg.minibatch_trajectories = 16;
  cfg.epochs = 2;
  cfg.iterations = 150;

  HibidConfig hibid;
  hibid.hidden = 16;
  const TrainResult result = train_hibid(env, cfg, hibid, bidder,
                                         InitialPlanMode::equal_split, 610, 2, {});

  nn::FeedforwardSizes sizes;
  sizes.obs_dim = 3;
  sizes.action_dim = 1;
  sizes.hidden = hibid.hidden;
  nn::FeedforwardPolicy trained(sizes, result.final_params);

  // Follow the mean policy through one episode.
  double consumed = 0.0;
  double remaining = budget;
  std::vector<double> alloc(m);
  for (int s = 0; s < m; ++s) {
    alloc[s] = hibid_prime_allocate(trained, s, m, consumed, remaining, budget);
    remaining -= alloc[s];
    if (s == 1) consumed += std::min(alloc[s], 300.0);
  }
  CHECK(alloc[1] > 0.6 * budget);
}

TEST_SUITE_END();
