#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "drowsy/errors.hpp"

namespace drowsy::nn {

// Dense row-major tensor. Rank-3 tensors are laid out height x width x channels.
template <typename S>
struct TensorT {
  std::vector<int> shape;
  std::vector<S> data;

  TensorT() = default;

  explicit TensorT(std::vector<int> shp)
      : shape(std::move(shp)), data(count(shape), S(0)) {}

  TensorT(std::vector<int> shp, std::vector<S> values)
      : shape(std::move(shp)), data(std::move(values)) {
    if (data.size() != count(shape))
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(shape));
  }

  static std::size_t count(const std::vector<int>& shp) {
    std::size_t n = 1;
    for (int d : shp) {
      if (d < 1) throw ShapeError("tensor extent must be >= 1, got " + shape_str(shp));
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }

  // Rank-3 accessors, (row, col, channel).
  S& at(int i, int j, int c) {
    return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + c];
  }
  S at(int i, int j, int c) const {
    return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + c];
  }

  bool all_finite() const {
    for (S v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  static std::string shape_str(const std::vector<int>& shp) {
    std::string s = "[";
    for (std::size_t i = 0; i < shp.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shp[i]);
    }
    return s + "]";
  }
  std::string shape_str() const { return shape_str(shape); }

  template <typename T>
  TensorT<T> cast() const {
    TensorT<T> out;
    out.shape = shape;
    out.data.reserve(data.size());
    for (S v : data) out.data.push_back(static_cast<T>(v));
    return out;
  }

  friend bool operator==(const TensorT&, const TensorT&) = default;
};

using Tensor = TensorT<float>;

}  // namespace drowsy::nn
