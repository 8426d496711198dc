#pragma once

#include <cstdint>

namespace bidlab {

/// Counter-based deterministic random source. Each draw hashes
/// (key, counter) with a splitmix64-style finalizer, and split(lane) derives
/// an independent sub-stream key, so advertiser- or trajectory-level
/// parallelism never changes the numbers drawn.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

  /// Independent sub-stream; deterministic in (key, lane).
  CounterRng split(std::uint64_t lane) const;

  std::uint64_t next_u64();
  double uniform01();  ///< [0, 1), 53-bit resolution
  double uniform(double lo, double hi);
  double normal(double mean, double stddev);  ///< Box-Muller, 2 draws per call
  double lognormal(double log_mean, double log_stddev);
  double pareto(double shape, double scale = 1.0);
  int uniform_int(int lo, int hi);  ///< inclusive bounds

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace bidlab
