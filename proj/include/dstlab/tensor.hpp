#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "dstlab/common.hpp"

namespace dstlab {

inline size_t shape_product(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

// Dense row-major 64-bit float array. Shape [B, D] for flat features,
// [B, C, H, W] for images, [out, in] for linear weights and
// [c_out, c_in, k, k] for convolution weights.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<size_t> s) : shape(std::move(s)), data(shape_product(shape), 0.0) {}

  static Tensor from(std::vector<size_t> s, std::vector<double> values) {
    Tensor t;
    t.shape = std::move(s);
    if (shape_product(t.shape) != values.size())
      throw config_error("tensor data length does not match shape");
    for (size_t d : t.shape)
      if (d == 0) throw config_error("tensor shape entries must be >= 1");
    t.data = std::move(values);
    return t;
  }

  size_t size() const { return data.size(); }
  size_t dim(size_t i) const { return shape.at(i); }
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }

  // Loaders call this on anything that comes from outside the process.
  void require_finite(const std::string& context) const {
    for (size_t i = 0; i < data.size(); ++i)
      if (!std::isfinite(data[i]))
        throw data_error("non-finite value at flat index " + std::to_string(i) + " in " + context);
  }

  std::string shape_string() const {
    std::string s;
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s;
  }
};

}  // namespace dstlab
