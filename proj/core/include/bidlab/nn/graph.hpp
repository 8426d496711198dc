#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bidlab/nn/tensor.hpp"

namespace bidlab::nn {

/// Define-by-run reverse-mode tape. Every op validates shapes before
/// computing and records a backward closure only when the graph is recording
/// and some input requires a gradient, so the same forward code serves both
/// rollout (recording = false) and training. Evaluation order is fixed, so
/// results are bit-reproducible and identical between batched and per-row
/// calls.
class Graph {
 public:
  explicit Graph(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }

  int leaf(Tensor value, bool needs_grad = false);
  int constant_row(std::span<const double> values) { return leaf(Tensor::row(values)); }
  int constant_scalar(double value) { return leaf(Tensor::scalar(value)); }
  /// (rows x 1) column with every entry set to `value`.
  int constant_column(int rows, double value);

  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  int matmul(int a, int b);
  int add(int a, int b);             ///< same shape
  int add_row(int a, int row);       ///< (r x c) + (1 x c) broadcast
  int add_scalar_node(int a, int s); ///< (r x c) + (1 x 1) broadcast
  int add_const(int a, double c);
  int sub(int a, int b);             ///< same shape
  int hadamard(int a, int b);        ///< same shape
  int scalar_mul(int a, int s);      ///< (r x c) * (1 x 1) broadcast
  int scale(int a, double c);
  int relu(int a);
  int sigmoid(int a);
  int tanh_op(int a);
  int exp_op(int a);
  int square(int a);
  int concat_cols(int a, int b);
  int row_sum(int a);                ///< (r x c) -> (r x 1)
  int sum_all(int a);                ///< -> (1 x 1)
  int mean_all(int a);               ///< -> (1 x 1)
  int min_elem(int a, int b);        ///< elementwise min, same shape
  int clamp_op(int a, double lo, double hi);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every leaf that needs a
  /// gradient. The loss must be 1 x 1 and finite.
  void backward(int loss);

 private:
  using BackFn = std::function<void(Graph&, int self)>;

  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    bool touched = false;
    BackFn back;
  };

  int push(Tensor value, bool needs_grad, BackFn back);
  void accumulate(int id, const Tensor& delta);
  void accumulate_scaled(int id, const Tensor& delta, double factor);
  bool want(std::initializer_list<int> parents) const;

  std::vector<Node> nodes_;
  bool recording_ = true;
};

}  // namespace bidlab::nn
