#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bidlab/nn/graph.hpp"
#include "bidlab/nn/tensor.hpp"
#include "bidlab/rng.hpp"

namespace bidlab::nn {

/// Named parameter tensors with gradient buffers and adaptive-moment
/// optimizer state. Iteration order is insertion order, which keeps updates
/// and checkpoints deterministic.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor adam_m;
    Tensor adam_v;
  };

  int add(const std::string& name, Tensor init);
  int index_of(const std::string& name) const;  ///< -1 when absent
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;

  int count() const { return static_cast<int>(entries_.size()); }
  Entry& entry(int i) { return entries_[i]; }
  const Entry& entry(int i) const { return entries_[i]; }

  void zero_grad();
  /// Adam update with bias correction; decay rates 0.9/0.999, epsilon 1e-8.
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  long step_count() const { return step_; }

  double grad_max_abs() const;
  size_t parameter_count() const;

  /// Versioned text checkpoint; values are hexfloats so reloads are
  /// bit-exact.
  void save(const std::string& path,
            const std::vector<std::pair<std::string, std::string>>& meta) const;
  static ParamStore load(const std::string& path,
                         std::vector<std::pair<std::string, std::string>>* meta = nullptr);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
  long step_ = 0;
};

/// Leaf ids of every parameter bound into a graph, in store order.
struct BoundParams {
  std::vector<int> node_of;
};

BoundParams bind_params(Graph& graph, const ParamStore& store);
/// Adds the graph's leaf gradients into the store's grad buffers.
void harvest_grads(const Graph& graph, const BoundParams& bound, ParamStore& store);

Tensor init_uniform_fanin(int rows, int cols, CounterRng& rng);
/// Gram-Schmidt orthonormal columns (or rows when cols > rows).
Tensor init_orthogonal(int rows, int cols, CounterRng& rng);

}  // namespace bidlab::nn
