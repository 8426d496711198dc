#include "bidlab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace bidlab {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t fmix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

CounterRng CounterRng::split(std::uint64_t lane) const {
  return CounterRng(fmix64(key_ ^ (kGamma * (lane + 0x632BE59BD9B4E019ULL))));
}

std::uint64_t CounterRng::next_u64() {
  return fmix64(key_ + kGamma * ++counter_);
}

double CounterRng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double CounterRng::normal(double mean, double stddev) {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * M_PI * u2);
}

double CounterRng::lognormal(double log_mean, double log_stddev) {
  return std::exp(normal(log_mean, log_stddev));
}

double CounterRng::pareto(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("pareto: shape and scale must be positive");
  }
  const double u = 1.0 - uniform01();  // (0, 1]
  return scale * std::pow(u, -1.0 / shape);
}

int CounterRng::uniform_int(int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
  const auto range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  return lo + static_cast<int>(next_u64() % range);
}

}  // namespace bidlab
