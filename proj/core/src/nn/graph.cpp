#include "bidlab/nn/graph.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bidlab::nn {
namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("nn::Graph: ") + what);
}

}  // namespace

int Graph::push(Tensor value, bool needs_grad, BackFn back) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = needs_grad;
  if (needs_grad) node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

bool Graph::want(std::initializer_list<int> parents) const {
  if (!recording_) return false;
  for (int p : parents) {
    if (nodes_[p].needs_grad) return true;
  }
  return false;
}

void Graph::accumulate(int id, const Tensor& delta) {
  accumulate_scaled(id, delta, 1.0);
}

void Graph::accumulate_scaled(int id, const Tensor& delta, double factor) {
  Node& node = nodes_[id];
  if (!node.needs_grad) return;
  if (node.grad.size() == 0) node.grad = Tensor(node.value.rows, node.value.cols);
  for (size_t i = 0; i < delta.size(); ++i) node.grad.data[i] += factor * delta.data[i];
  node.touched = true;
}

int Graph::leaf(Tensor value, bool needs_grad) {
  needs_grad = needs_grad && recording_;
  const int id = push(std::move(value), needs_grad, nullptr);
  if (needs_grad) nodes_[id].grad = Tensor(nodes_[id].value.rows, nodes_[id].value.cols);
  return id;
}

int Graph::constant_column(int rows, double value) {
  return leaf(Tensor(rows, 1, value));
}

int Graph::matmul(int a, int b) {
  const Tensor& A = nodes_[a].value;
  const Tensor& B = nodes_[b].value;
  check(A.cols == B.rows, "matmul: inner dimensions differ");
  Tensor C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < B.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < A.cols; ++k) acc += A.at(i, k) * B.at(k, j);
      C.at(i, j) = acc;
    }
  }
  if (!want({a, b})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a, b](Graph& g, int self) {
    const Tensor& G = g.nodes_[self].grad;
    const Tensor& A = g.nodes_[a].value;
    const Tensor& B = g.nodes_[b].value;
    if (g.nodes_[a].needs_grad) {
      Tensor dA(A.rows, A.cols);
      for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
          double acc = 0.0;
          for (int j = 0; j < B.cols; ++j) acc += G.at(i, j) * B.at(k, j);
          dA.at(i, k) = acc;
        }
      g.accumulate(a, dA);
    }
    if (g.nodes_[b].needs_grad) {
      Tensor dB(B.rows, B.cols);
      for (int k = 0; k < B.rows; ++k)
        for (int j = 0; j < B.cols; ++j) {
          double acc = 0.0;
          for (int i = 0; i < A.rows; ++i) acc += A.at(i, k) * G.at(i, j);
          dB.at(k, j) = acc;
        }
      g.accumulate(b, dB);
    }
  });
}

int Graph::add(int a, int b) {
  const Tensor& A = nodes_[a].value;
  const Tensor& B = nodes_[b].value;
  check(A.same_shape(B), "add: shape mismatch");
  Tensor C = A;
  for (size_t i = 0; i < C.size(); ++i) C.data[i] += B.data[i];
  if (!want({a, b})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a, b](Graph& g, int self) {
    g.accumulate(a, g.nodes_[self].grad);
    g.accumulate(b, g.nodes_[self].grad);
  });
}

int Graph::add_row(int a, int row) {
  const Tensor& A = nodes_[a].value;
  const Tensor& R = nodes_[row].value;
  check(R.rows == 1 && R.cols == A.cols, "add_row: need a 1 x cols row vector");
  Tensor C = A;
  for (int i = 0; i < C.rows; ++i)
    for (int j = 0; j < C.cols; ++j) C.at(i, j) += R.at(0, j);
  if (!want({a, row})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a, row](Graph& g, int self) {
    const Tensor& G = g.nodes_[self].grad;
    g.accumulate(a, G);
    if (g.nodes_[row].needs_grad) {
      Tensor dR(1, G.cols);
      for (int i = 0; i < G.rows; ++i)
        for (int j = 0; j < G.cols; ++j) dR.at(0, j) += G.at(i, j);
      g.accumulate(row, dR);
    }
  });
}

int Graph::add_scalar_node(int a, int s) {
  const Tensor& A = nodes_[a].value;
  const Tensor& S = nodes_[s].value;
  check(S.rows == 1 && S.cols == 1, "add_scalar_node: scalar must be 1 x 1");
  Tensor C = A;
  for (double& v : C.data) v += S.data[0];
  if (!want({a, s})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a, s](Graph& g, int self) {
    const Tensor& G = g.nodes_[self].grad;
    g.accumulate(a, G);
    if (g.nodes_[s].needs_grad) {
      double acc = 0.0;
      for (double v : G.data) acc += v;
      g.accumulate(s, Tensor::scalar(acc));
    }
  });
}

int Graph::add_const(int a, double c) {
  Tensor C = nodes_[a].value;
  for (double& v : C.data) v += c;
  if (!want({a})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true,
              [a](Graph& g, int self) { g.accumulate(a, g.nodes_[self].grad); });
}

int Graph::sub(int a, int b) {
  const Tensor& A = nodes_[a].value;
  const Tensor& B = nodes_[b].value;
  check(A.same_shape(B), "sub: shape mismatch");
  Tensor C = A;
  for (size_t i = 0; i < C.size(); ++i) C.data[i] -= B.data[i];
  if (!want({a, b})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a, b](Graph& g, int self) {
    g.accumulate(a, g.nodes_[self].grad);
    g.accumulate_scaled(b, g.nodes_[self].grad, -1.0);
  });
}

int Graph::hadamard(int a, int b) {
  const Tensor& A = nodes_[a].value;
  const Tensor& B = nodes_[b].value;
  check(A.same_shape(B), "hadamard: shape mismatch");
  Tensor C = A;
  for (size_t i = 0; i < C.size(); ++i) C.data[i] *= B.data[i];
  if (!want({a, b})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a, b](Graph& g, int self) {
    const Tensor& G = g.nodes_[self].grad;
    if (g.nodes_[a].needs_grad) {
      Tensor dA = G;
      const Tensor& B_ = g.nodes_[b].value;
      for (size_t i = 0; i < dA.size(); ++i) dA.data[i] *= B_.data[i];
      g.accumulate(a, dA);
    }
    if (g.nodes_[b].needs_grad) {
      Tensor dB = G;
      const Tensor& A_ = g.nodes_[a].value;
      for (size_t i = 0; i < dB.size(); ++i) dB.data[i] *= A_.data[i];
      g.accumulate(b, dB);
    }
  });
}

int Graph::scalar_mul(int a, int s) {
  const Tensor& A = nodes_[a].value;
  const Tensor& S = nodes_[s].value;
  check(S.rows == 1 && S.cols == 1, "scalar_mul: scalar must be 1 x 1");
  Tensor C = A;
  for (double& v : C.data) v *= S.data[0];
  if (!want({a, s})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a, s](Graph& g, int self) {
    const Tensor& G = g.nodes_[self].grad;
    if (g.nodes_[a].needs_grad) {
      g.accumulate_scaled(a, G, g.nodes_[s].value.data[0]);
    }
    if (g.nodes_[s].needs_grad) {
      const Tensor& A_ = g.nodes_[a].value;
      double acc = 0.0;
      for (size_t i = 0; i < G.size(); ++i) acc += G.data[i] * A_.data[i];
      g.accumulate(s, Tensor::scalar(acc));
    }
  });
}

int Graph::scale(int a, double c) {
  Tensor C = nodes_[a].value;
  for (double& v : C.data) v *= c;
  if (!want({a})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a, c](Graph& g, int self) {
    g.accumulate_scaled(a, g.nodes_[self].grad, c);
  });
}

int Graph::relu(int a) {
  Tensor C = nodes_[a].value;
  for (double& v : C.data) v = v > 0.0 ? v : 0.0;
  if (!want({a})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a](Graph& g, int self) {
    Tensor d = g.nodes_[self].grad;
    const Tensor& A = g.nodes_[a].value;
    for (size_t i = 0; i < d.size(); ++i) {
      if (A.data[i] <= 0.0) d.data[i] = 0.0;
    }
    g.accumulate(a, d);
  });
}

int Graph::sigmoid(int a) {
  Tensor C = nodes_[a].value;
  for (double& v : C.data) v = 1.0 / (1.0 + std::exp(-v));
  if (!want({a})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a](Graph& g, int self) {
    Tensor d = g.nodes_[self].grad;
    const Tensor& Y = g.nodes_[self].value;
    for (size_t i = 0; i < d.size(); ++i) d.data[i] *= Y.data[i] * (1.0 - Y.data[i]);
    g.accumulate(a, d);
  });
}

int Graph::tanh_op(int a) {
  Tensor C = nodes_[a].value;
  for (double& v : C.data) v = std::tanh(v);
  if (!want({a})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a](Graph& g, int self) {
    Tensor d = g.nodes_[self].grad;
    const Tensor& Y = g.nodes_[self].value;
    for (size_t i = 0; i < d.size(); ++i) d.data[i] *= 1.0 - Y.data[i] * Y.data[i];
    g.accumulate(a, d);
  });
}

int Graph::exp_op(int a) {
  Tensor C = nodes_[a].value;
  for (double& v : C.data) v = std::exp(v);
  if (!want({a})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a](Graph& g, int self) {
    Tensor d = g.nodes_[self].grad;
    const Tensor& Y = g.nodes_[self].value;
    for (size_t i = 0; i < d.size(); ++i) d.data[i] *= Y.data[i];
    g.accumulate(a, d);
  });
}

int Graph::square(int a) {
  Tensor C = nodes_[a].value;
  for (double& v : C.data) v *= v;
  if (!want({a})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a](Graph& g, int self) {
    Tensor d = g.nodes_[self].grad;
    const Tensor& A = g.nodes_[a].value;
    for (size_t i = 0; i < d.size(); ++i) d.data[i] *= 2.0 * A.data[i];
    g.accumulate(a, d);
  });
}

int Graph::concat_cols(int a, int b) {
  const Tensor& A = nodes_[a].value;
  const Tensor& B = nodes_[b].value;
  check(A.rows == B.rows, "concat_cols: row mismatch");
  Tensor C(A.rows, A.cols + B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) C.at(i, j) = A.at(i, j);
    for (int j = 0; j < B.cols; ++j) C.at(i, A.cols + j) = B.at(i, j);
  }
  if (!want({a, b})) return push(std::move(C), false, nullptr);
  const int a_cols = A.cols;
  const int b_cols = B.cols;
  return push(std::move(C), true, [a, b, a_cols, b_cols](Graph& g, int self) {
    const Tensor& G = g.nodes_[self].grad;
    if (g.nodes_[a].needs_grad) {
      Tensor dA(G.rows, a_cols);
      for (int i = 0; i < G.rows; ++i)
        for (int j = 0; j < a_cols; ++j) dA.at(i, j) = G.at(i, j);
      g.accumulate(a, dA);
    }
    if (g.nodes_[b].needs_grad) {
      Tensor dB(G.rows, b_cols);
      for (int i = 0; i < G.rows; ++i)
        for (int j = 0; j < b_cols; ++j) dB.at(i, j) = G.at(i, a_cols + j);
      g.accumulate(b, dB);
    }
  });
}

int Graph::row_sum(int a) {
  const Tensor& A = nodes_[a].value;
  Tensor C(A.rows, 1);
  for (int i = 0; i < A.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < A.cols; ++j) acc += A.at(i, j);
    C.at(i, 0) = acc;
  }
  if (!want({a})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a](Graph& g, int self) {
    const Tensor& G = g.nodes_[self].grad;
    const Tensor& A = g.nodes_[a].value;
    Tensor dA(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i)
      for (int j = 0; j < A.cols; ++j) dA.at(i, j) = G.at(i, 0);
    g.accumulate(a, dA);
  });
}

int Graph::sum_all(int a) {
  const Tensor& A = nodes_[a].value;
  double acc = 0.0;
  for (double v : A.data) acc += v;
  if (!want({a})) return push(Tensor::scalar(acc), false, nullptr);
  return push(Tensor::scalar(acc), true, [a](Graph& g, int self) {
    const double go = g.nodes_[self].grad.data[0];
    const Tensor& A = g.nodes_[a].value;
    g.accumulate(a, Tensor(A.rows, A.cols, go));
  });
}

int Graph::mean_all(int a) {
  const Tensor& A = nodes_[a].value;
  check(A.size() > 0, "mean_all: empty tensor");
  double acc = 0.0;
  for (double v : A.data) acc += v;
  acc /= static_cast<double>(A.size());
  if (!want({a})) return push(Tensor::scalar(acc), false, nullptr);
  return push(Tensor::scalar(acc), true, [a](Graph& g, int self) {
    const Tensor& A = g.nodes_[a].value;
    const double go = g.nodes_[self].grad.data[0] / static_cast<double>(A.size());
    g.accumulate(a, Tensor(A.rows, A.cols, go));
  });
}

int Graph::min_elem(int a, int b) {
  const Tensor& A = nodes_[a].value;
  const Tensor& B = nodes_[b].value;
  check(A.same_shape(B), "min_elem: shape mismatch");
  Tensor C = A;
  for (size_t i = 0; i < C.size(); ++i) C.data[i] = std::min(A.data[i], B.data[i]);
  if (!want({a, b})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a, b](Graph& g, int self) {
    const Tensor& G = g.nodes_[self].grad;
    const Tensor& A_ = g.nodes_[a].value;
    const Tensor& B_ = g.nodes_[b].value;
    Tensor dA(G.rows, G.cols);
    Tensor dB(G.rows, G.cols);
    for (size_t i = 0; i < G.size(); ++i) {
      if (A_.data[i] <= B_.data[i]) {
        dA.data[i] = G.data[i];
      } else {
        dB.data[i] = G.data[i];
      }
    }
    g.accumulate(a, dA);
    g.accumulate(b, dB);
  });
}

int Graph::clamp_op(int a, double lo, double hi) {
  check(lo <= hi, "clamp: lo > hi");
  Tensor C = nodes_[a].value;
  for (double& v : C.data) v = v < lo ? lo : (v > hi ? hi : v);
  if (!want({a})) return push(std::move(C), false, nullptr);
  return push(std::move(C), true, [a, lo, hi](Graph& g, int self) {
    Tensor d = g.nodes_[self].grad;
    const Tensor& A = g.nodes_[a].value;
    for (size_t i = 0; i < d.size(); ++i) {
      if (A.data[i] < lo || A.data[i] > hi) d.data[i] = 0.0;
    }
    g.accumulate(a, d);
  });
}

void Graph::backward(int loss) {
  check(loss >= 0 && loss < static_cast<int>(nodes_.size()), "backward: bad node id");
  Node& l = nodes_[loss];
  check(l.value.rows == 1 && l.value.cols == 1, "backward: loss must be scalar");
  if (!std::isfinite(l.value.data[0])) {
    throw std::runtime_error("nn::Graph::backward: non-finite loss");
  }
  if (!recording_) {
    throw std::logic_error("nn::Graph::backward: graph is not recording");
  }
  if (l.grad.size() == 0) l.grad = Tensor(1, 1);
  l.grad.data[0] = 1.0;
  l.touched = true;
  for (int id = loss; id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.touched && node.back) node.back(*this, id);
  }
}

}  // namespace bidlab::nn
