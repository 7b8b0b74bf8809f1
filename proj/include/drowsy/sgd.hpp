#pragma once

#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "drowsy/errors.hpp"
#include "drowsy/layers.hpp"

namespace drowsy::nn {

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.0;
  int batch_size = 32;
  int epochs = 1;
  std::uint64_t seed = 0;

  // learning_rate 0 is allowed so a zero step can be exercised; training with
  // it is a no-op by definition.
  void validate() const {
    if (learning_rate < 0.0)
      throw std::invalid_argument("SgdConfig: learning_rate must be >= 0");
    if (momentum < 0.0) throw std::invalid_argument("SgdConfig: momentum must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("SgdConfig: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("SgdConfig: epochs must be >= 1");
  }

  std::string digest() const {
    std::ostringstream os;
    os << "lr=" << learning_rate << ",momentum=" << momentum
       << ",batch=" << batch_size << ",epochs=" << epochs << ",seed=" << seed;
    return os.str();
  }
};

// w <- w - lr * g, in place.
template <typename S>
void sgd_step(std::span<S> params, std::span<const S> grads, double lr) {
  if (params.size() != grads.size())
    throw ShapeError("sgd_step: " + std::to_string(params.size()) + " params vs " +
                     std::to_string(grads.size()) + " grads");
  const S s = static_cast<S>(lr);
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= s * grads[i];
}

// Plain SGD with optional classical momentum: v <- mu*v - lr*g; w <- w + v.
// One velocity buffer per parameter block, keyed by block order.
template <typename S>
class SgdOptimizerT {
 public:
  SgdOptimizerT(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

  void step(const std::vector<ParamBlock<S>>& blocks) {
    if (momentum_ == 0.0) {
      for (const auto& b : blocks)
        sgd_step<S>(std::span<S>(*b.values), std::span<const S>(*b.grads), lr_);
      return;
    }
    if (velocity_.empty()) {
      velocity_.reserve(blocks.size());
      for (const auto& b : blocks) velocity_.emplace_back(b.values->size(), S(0));
    }
    if (velocity_.size() != blocks.size())
      throw ShapeError("SgdOptimizer: parameter block count changed between steps");
    const S lr = static_cast<S>(lr_);
    const S mu = static_cast<S>(momentum_);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      auto& v = velocity_[k];
      auto& w = *blocks[k].values;
      const auto& g = *blocks[k].grads;
      if (v.size() != w.size() || w.size() != g.size())
        throw ShapeError("SgdOptimizer: block " + std::to_string(k) + " size mismatch");
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = mu * v[i] - lr * g[i];
        w[i] += v[i];
      }
    }
  }

 private:
  double lr_, momentum_;
  std::vector<std::vector<S>> velocity_;
};

using SgdOptimizer = SgdOptimizerT<float>;

}  // namespace drowsy::nn
