#include "bidlab/nn/tensor.hpp"

#include <cmath>

namespace bidlab::nn {

Tensor Tensor::row(std::span<const double> values) {
  Tensor t(1, static_cast<int>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) t.data[i] = values[i];
  return t;
}

Tensor Tensor::scalar(double value) {
  Tensor t(1, 1);
  t.data[0] = value;
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace bidlab::nn
