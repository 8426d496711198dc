#include "bidlab/domain.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bidlab {

double cpr(const Impression& imp) {
  if (!(imp.price > 0.0)) {
    throw std::invalid_argument("cpr: price must be positive");
  }
  return imp.value / imp.price;
}

BudgetPlan::BudgetPlan(std::vector<double> allocations, double budget)
    : allocations_(std::move(allocations)), budget_(budget) {
  if (!(budget_ > 0.0)) {
    throw std::invalid_argument("BudgetPlan: budget must be positive");
  }
  if (allocations_.empty()) {
    throw std::invalid_argument("BudgetPlan: needs at least one stage");
  }
  if (!feasible(allocations_, budget_)) {
    throw std::invalid_argument("BudgetPlan: allocations violate rho >= 0, sum(rho) <= B");
  }
}

double BudgetPlan::total() const {
  return std::accumulate(allocations_.begin(), allocations_.end(), 0.0);
}

bool BudgetPlan::feasible(std::span<const double> allocations, double budget) {
  double sum = 0.0;
  for (double a : allocations) {
    if (!std::isfinite(a) || a < 0.0) return false;
    sum += a;
  }
  const double slack = 1e-9 * std::max(1.0, budget);
  return sum <= budget + slack;
}

int StageBoundaries::total() const {
  return std::accumulate(lengths.begin(), lengths.end(), 0);
}

int StageBoundaries::offset(int stage) const {
  int off = 0;
  for (int s = 0; s < stage; ++s) off += lengths[s];
  return off;
}

double EpisodeOutcome::total_return() const {
  return std::accumulate(returns.begin(), returns.end(), 0.0);
}

double EpisodeOutcome::total_cost() const {
  return std::accumulate(costs.begin(), costs.end(), 0.0);
}

std::span<const Impression> EpisodeStream::stage_span(int stage) const {
  const int off = stages.offset(stage);
  const int len = stages.lengths[stage];
  return std::span<const Impression>(impressions).subspan(off, len);
}

double EpisodeStream::total_value() const {
  double v = 0.0;
  for (const auto& imp : impressions) v += imp.value;
  return v;
}

}  // namespace bidlab
