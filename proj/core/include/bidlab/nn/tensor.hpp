#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bidlab::nn {

/// Dense rank-2 array, row-major. Vectors are 1 x n rows, scalars 1 x 1.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

  static Tensor row(std::span<const double> values);
  static Tensor scalar(double value);

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Tensor& other) const {
    return rows == other.rows && cols == other.cols;
  }
  bool all_finite() const;
};

}  // namespace bidlab::nn
