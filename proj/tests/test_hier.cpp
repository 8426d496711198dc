#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bidlab/hier.hpp"
#include "bidlab/rng.hpp"
#include "oracles.hpp"

using namespace bidlab;

namespace {

double dist2(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d);
}

}  // namespace

TEST_SUITE_BEGIN("hier");

TEST_CASE("projection is the identity inside the feasible set") {
  const std::vector<double> raw = {0.2, 0.3, 0.1};
  const BudgetPlan plan = project_onto_budget_simplex(raw, 1.0);
  for (int i = 0; i < 3; ++i) CHECK(plan.allocations()[i] == doctest::Approx(raw[i]));
}

TEST_CASE("projection worked examples") {
  SUBCASE("(3,-1) with B=1 lands on (1,0)") {
    const BudgetPlan plan = project_onto_budget_simplex(std::vector<double>{3.0, -1.0}, 1.0);
    CHECK(plan.allocations()[0] == doctest::Approx(1.0));
    CHECK(plan.allocations()[1] == doctest::Approx(0.0));
  }
  SUBCASE("(2,2) with B=2 splits evenly") {
    const BudgetPlan plan = project_onto_budget_simplex(std::vector<double>{2.0, 2.0}, 2.0);
    CHECK(plan.allocations()[0] == doctest::Approx(1.0));
    CHECK(plan.allocations()[1] == doctest::Approx(1.0));
  }
}

TEST_CASE("projection rejects non-finite input") {
  CHECK_THROWS_AS(
      project_onto_budget_simplex(std::vector<double>{1.0, std::nan("")}, 1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(project_onto_budget_simplex(std::vector<double>{}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("projection matches the active-set oracle on random pairs") {
  CounterRng rng(500);
  for (int trial = 0; trial < 300; ++trial) {
    CounterRng sub = rng.split(trial);
    const int m = 2 + sub.uniform_int(0, 6);
    const double budget = sub.uniform(0.5, 200.0);
    std::vector<double> raw(m);
    for (double& x : raw) x = sub.uniform(-1.5, 1.5) * budget;
    const BudgetPlan plan = project_onto_budget_simplex(raw, budget);
    const auto expected = oracles::project_simplex_active_set(raw, budget);
    CHECK(dist2(plan.allocations(), expected) < 1e-6);
  }
}

TEST_CASE("projection is idempotent and non-expansive") {
  CounterRng rng(501);
  for (int trial = 0; trial < 200; ++trial) {
    CounterRng sub = rng.split(trial);
    const int m = 2 + sub.uniform_int(0, 6);
    const double budget = sub.uniform(1.0, 50.0);
    std::vector<double> x(m), y(m);
    for (int i = 0; i < m; ++i) {
      x[i] = sub.uniform(-2.0, 2.0) * budget;
      y[i] = sub.uniform(-2.0, 2.0) * budget;
    }
    const auto px = project_onto_budget_simplex(x, budget).allocations();
    const auto ppx = project_onto_budget_simplex(px, budget).allocations();
    CHECK(dist2(px, ppx) < 1e-9);

    const auto py = project_onto_budget_simplex(y, budget).allocations();
    CHECK(dist2(px, py) <= dist2(x, y) + 1e-9);
  }
}

TEST_CASE("apply_action: zero action keeps the plan") {
  const BudgetPlan prev({30.0, 20.0, 10.0}, 100.0);
  const BudgetPlan next = apply_action(prev, std::vector<double>{0.0, 0.0, 0.0}, 100.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(next.allocations()[i] == doctest::Approx(prev.allocations()[i]));
  }
}

TEST_CASE("apply_action: overfull symmetric point projects back onto the face") {
  const double b = 80.0;
  const BudgetPlan prev({0.5 * b, 0.5 * b}, b);
  const BudgetPlan next = apply_action(prev, std::vector<double>{0.5 * b, 0.5 * b}, b);
  CHECK(next.allocations()[0] == doctest::Approx(0.5 * b));
  CHECK(next.allocations()[1] == doctest::Approx(0.5 * b));
}

TEST_CASE("apply_action: dimension mismatch and clamping") {
  const BudgetPlan prev({30.0, 20.0}, 100.0);
  CHECK_THROWS_AS(apply_action(prev, std::vector<double>{1.0}, 100.0),
                  std::invalid_argument);

  // A wild action is capped at +-clamp before projection.
  const BudgetPlan clamped =
      apply_action(prev, std::vector<double>{500.0, 0.0}, 100.0, 50.0);
  CHECK(clamped.allocations()[0] == doctest::Approx(80.0));
}

TEST_CASE("apply_action output stays feasible on random walks") {
  CounterRng rng(502);
  const double b = 120.0;
  BudgetPlan plan(std::vector<double>(4, b / 4), b);
  for (int step = 0; step < 200; ++step) {
    std::vector<double> action(4);
    for (double& a : action) a = rng.uniform(-b, b);
    plan = apply_action(plan, action, b, b / 4);
    double sum = 0.0;
    for (double x : plan.allocations()) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum <= b * (1.0 + 1e-9));
  }
}

TEST_CASE("reward is the increment in total return") {
  EpisodeOutcome cur{{3.0, 1.0}, {1.0, 1.0}};
  EpisodeOutcome prev{{1.0, 1.0}, {1.0, 1.0}};
  CHECK(compute_reward(cur, cur) == doctest::Approx(0.0));
  CHECK(compute_reward(cur, prev) == doctest::Approx(2.0));
  EpisodeOutcome mismatched{{1.0}, {1.0}};
  CHECK_THROWS_AS(compute_reward(cur, mismatched), std::invalid_argument);
}

TEST_CASE("rewards telescope to last-minus-first total return") {
  CounterRng rng(503);
  std::vector<EpisodeOutcome> outcomes;
  for (int e = 0; e < 6; ++e) {
    EpisodeOutcome o;
    for (int s = 0; s < 3; ++s) {
      o.returns.push_back(rng.uniform(0.0, 5.0));
      o.costs.push_back(rng.uniform(0.0, 2.0));
    }
    outcomes.push_back(o);
  }
  double sum = 0.0;
  for (size_t e = 1; e < outcomes.size(); ++e) {
    sum += compute_reward(outcomes[e], outcomes[e - 1]);
  }
  CHECK(sum == doctest::Approx(outcomes.back().total_return() -
                               outcomes.front().total_return()));
}

TEST_CASE("initial plan: equal split") {
  const BudgetPlan plan = initial_plan(InitialPlanMode::equal_split, 120.0, 6);
  for (double a : plan.allocations()) CHECK(a == doctest::Approx(20.0));
}

TEST_CASE("initial plan: consumption is rescaled to spend the full budget") {
  EpisodeOutcome ep0;
  ep0.returns = {0, 0, 0, 0, 0, 0};
  ep0.costs = {1.0, 1.0, 2.0, 0.0, 0.0, 0.0};
  const BudgetPlan plan =
      initial_plan(InitialPlanMode::first_episode_consumption, 100.0, 6, &ep0);
  CHECK(plan.allocations()[0] == doctest::Approx(25.0));
  CHECK(plan.allocations()[1] == doctest::Approx(25.0));
  CHECK(plan.allocations()[2] == doctest::Approx(50.0));
  CHECK(plan.allocations()[3] == doctest::Approx(0.0));
}

TEST_CASE("initial plan: zero consumption falls back to an equal split") {
  EpisodeOutcome ep0;
  ep0.returns = {0, 0, 0};
  ep0.costs = {0, 0, 0};
  const BudgetPlan plan =
      initial_plan(InitialPlanMode::first_episode_consumption, 90.0, 3, &ep0);
  for (double a : plan.allocations()) CHECK(a == doctest::Approx(30.0));
  CHECK_THROWS_AS(initial_plan(InitialPlanMode::first_episode_consumption, 90.0, 3, nullptr),
                  std::invalid_argument);
}

TEST_CASE("state normalization scales everything by m/B") {
  PlannerState state;
  state.budget = 100.0;
  EpisodeOutcome out;
  out.returns = {2.0, 4.0, 0.0, 0.0, 0.0};
  out.costs = {1.0, 1.0, 1.0, 1.0, 1.0};
  state.history.push_back({BudgetPlan({20.0, 20.0, 20.0, 20.0, 20.0}, 100.0), out});

  const NormalizedState ns = normalize_state(state, 5);
  CHECK(ns.scaled_budget == doctest::Approx(5.0));
  REQUIRE(ns.entries.size() == 1);
  REQUIRE(ns.entries[0].size() == 15);
  CHECK(ns.entries[0][0] == doctest::Approx(1.0));   // rho_1 * m/B
  CHECK(ns.entries[0][5] == doctest::Approx(0.1));   // R_1 * m/B
  CHECK(ns.entries[0][10] == doctest::Approx(0.05)); // C_1 * m/B
  for (int i = 0; i < 5; ++i) CHECK(ns.entries[0][i] == doctest::Approx(1.0));
}

TEST_SUITE_END();
