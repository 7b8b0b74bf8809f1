#pragma once

#include <algorithm>
#include <cmath>

#include "drowsy/errors.hpp"
#include "drowsy/tensor.hpp"

namespace drowsy::nn {

template <typename S>
struct LossResult {
  S value;
  TensorT<S> grad;  // dLoss/dPred, same shape as pred
};

// Per-unit binary cross-entropy of sigmoid outputs against a one-hot target,
// averaged over the units. Predictions are clamped to [1e-7, 1 - 1e-7] before
// the logs; the clamp is treated as pass-through in the gradient.
template <typename S>
LossResult<S> cross_entropy(const TensorT<S>& pred, const TensorT<S>& target) {
  if (pred.rank() != 1 || pred.shape != target.shape)
    throw ShapeError("cross_entropy: pred " + pred.shape_str() + " vs target " +
                     target.shape_str());

  S one_count = S(0);
  for (S t : target.data) {
    if (t != S(0) && t != S(1))
      throw std::invalid_argument("cross_entropy: target must be one-hot");
    one_count += t;
  }
  if (one_count != S(1))
    throw std::invalid_argument("cross_entropy: target must have exactly one hot unit");

  const S eps = S(1e-7);
  const int n = pred.shape[0];
  LossResult<S> result{S(0), TensorT<S>(pred.shape)};
  for (int k = 0; k < n; ++k) {
    const S p = std::clamp(pred.data[k], eps, S(1) - eps);
    const S t = target.data[k];
    result.value += -(t * std::log(p) + (S(1) - t) * std::log(S(1) - p));
    result.grad.data[k] = (-t / p + (S(1) - t) / (S(1) - p)) / static_cast<S>(n);
  }
  result.value /= static_cast<S>(n);
  return result;
}

}  // namespace drowsy::nn
