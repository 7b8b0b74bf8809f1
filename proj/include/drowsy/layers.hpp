#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "drowsy/errors.hpp"
#include "drowsy/rng.hpp"
#include "drowsy/tensor.hpp"

namespace drowsy::nn {

enum class Mode { Train, Infer };

template <typename S>
struct ParamBlock {
  std::vector<S>* values;
  std::vector<S>* grads;
  std::string tag;
};

template <typename S>
class LayerT {
 public:
  virtual ~LayerT() = default;

  // Training-path pass; caches whatever backward() will need.
  virtual TensorT<S> forward(const TensorT<S>& x, Mode mode, Rng* rng = nullptr) = 0;

  // Pure inference pass. Writes no state; safe to call concurrently.
  virtual TensorT<S> infer(const TensorT<S>& x) const = 0;

  // Gradient of the loss w.r.t. the layer input. Parameter gradients are
  // accumulated into the layer's grad buffers until zero_grads().
  virtual TensorT<S> backward(const TensorT<S>& grad_out) = 0;

  virtual void collect_params(std::vector<ParamBlock<S>>& out) { (void)out; }
  virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
  virtual std::string kind() const = 0;

  void zero_grads() {
    std::vector<ParamBlock<S>> blocks;
    collect_params(blocks);
    for (auto& b : blocks) std::fill(b.grads->begin(), b.grads->end(), S(0));
  }

 protected:
  void require_forward(bool has, const char* who) const {
    if (!has) throw StateError(std::string(who) + ": backward before forward");
  }
};

// Elementwise max(0, x).
template <typename S>
TensorT<S> relu(const TensorT<S>& x) {
  TensorT<S> out = x;
  for (S& v : out.data) v = v > S(0) ? v : S(0);
  return out;
}

// Elementwise 1 / (1 + exp(-x)).
template <typename S>
TensorT<S> sigmoid(const TensorT<S>& x) {
  TensorT<S> out = x;
  for (S& v : out.data) v = S(1) / (S(1) + std::exp(-v));
  return out;
}

// 2-D convolution, valid padding, stride 1, HWC layout.
// Weights are stored [kh][kw][cin][cout]; one bias per output channel.
template <typename S>
class Conv2DT final : public LayerT<S> {
 public:
  Conv2DT(int kernel_h, int kernel_w, int in_channels, int out_channels)
      : kh_(kernel_h), kw_(kernel_w), cin_(in_channels), cout_(out_channels) {
    if (kh_ < 1 || kw_ < 1 || cin_ < 1 || cout_ < 1)
      throw std::invalid_argument("Conv2D: all extents must be >= 1");
    weights_.assign(static_cast<std::size_t>(kh_) * kw_ * cin_ * cout_, S(0));
    bias_.assign(static_cast<std::size_t>(cout_), S(0));
    weight_grads_.assign(weights_.size(), S(0));
    bias_grads_.assign(bias_.size(), S(0));
  }

  void init_he_uniform(Rng& rng) {
    const double limit = std::sqrt(6.0 / (static_cast<double>(kh_) * kw_ * cin_));
    for (S& w : weights_) w = static_cast<S>(rng.uniform(-limit, limit));
    std::fill(bias_.begin(), bias_.end(), S(0));
  }

  TensorT<S> forward(const TensorT<S>& x, Mode, Rng*) override {
    check_input(x);
    input_ = x;
    has_forward_ = true;
    return run(x);
  }

  TensorT<S> infer(const TensorT<S>& x) const override {
    check_input(x);
    return run(x);
  }

  TensorT<S> backward(const TensorT<S>& grad_out) override {
    this->require_forward(has_forward_, "Conv2D");
    has_forward_ = false;
    const int h = input_.shape[0], w = input_.shape[1];
    const int oh = h - kh_ + 1, ow = w - kw_ + 1;
    if (grad_out.shape != std::vector<int>{oh, ow, cout_})
      throw ShapeError("Conv2D backward: upstream gradient " + grad_out.shape_str() +
                       " does not match output [" + std::to_string(oh) + "," +
                       std::to_string(ow) + "," + std::to_string(cout_) + "]");

    TensorT<S> dx(input_.shape);
    for (int i = 0; i < oh; ++i) {
      for (int j = 0; j < ow; ++j) {
        const S* g = &grad_out.data[(static_cast<std::size_t>(i) * ow + j) * cout_];
        for (int o = 0; o < cout_; ++o) bias_grads_[o] += g[o];
        for (int a = 0; a < kh_; ++a) {
          for (int b = 0; b < kw_; ++b) {
            const S* xr = &input_.data[(static_cast<std::size_t>(i + a) * w + (j + b)) * cin_];
            S* dxr = &dx.data[(static_cast<std::size_t>(i + a) * w + (j + b)) * cin_];
            for (int c = 0; c < cin_; ++c) {
              const std::size_t base =
                  ((static_cast<std::size_t>(a) * kw_ + b) * cin_ + c) * cout_;
              const S xv = xr[c];
              S acc = S(0);
              S* dwr = &weight_grads_[base];
              const S* wr = &weights_[base];
              for (int o = 0; o < cout_; ++o) {
                dwr[o] += xv * g[o];
                acc += wr[o] * g[o];
              }
              dxr[c] += acc;
            }
          }
        }
      }
    }
    return dx;
  }

  void collect_params(std::vector<ParamBlock<S>>& out) override {
    out.push_back({&weights_, &weight_grads_, "conv2d.weights"});
    out.push_back({&bias_, &bias_grads_, "conv2d.bias"});
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    check_shape(in);
    return {in[0] - kh_ + 1, in[1] - kw_ + 1, cout_};
  }

  std::string kind() const override { return "conv2d"; }

  int kernel_h() const { return kh_; }
  int kernel_w() const { return kw_; }
  int in_channels() const { return cin_; }
  int out_channels() const { return cout_; }
  std::vector<S>& weights() { return weights_; }
  std::vector<S>& bias() { return bias_; }

 private:
  void check_shape(const std::vector<int>& in) const {
    if (in.size() != 3 || in[2] != cin_ || in[0] < kh_ || in[1] < kw_)
      throw ShapeError("Conv2D: input " + TensorT<S>::shape_str(in) +
                       " incompatible with kernel [" + std::to_string(kh_) + "," +
                       std::to_string(kw_) + "," + std::to_string(cin_) + "," +
                       std::to_string(cout_) + "]");
  }
  void check_input(const TensorT<S>& x) const { check_shape(x.shape); }

  TensorT<S> run(const TensorT<S>& x) const {
    const int h = x.shape[0], w = x.shape[1];
    const int oh = h - kh_ + 1, ow = w - kw_ + 1;
    TensorT<S> out({oh, ow, cout_});
    for (int i = 0; i < oh; ++i) {
      for (int j = 0; j < ow; ++j) {
        S* acc = &out.data[(static_cast<std::size_t>(i) * ow + j) * cout_];
        for (int o = 0; o < cout_; ++o) acc[o] = bias_[o];
        for (int a = 0; a < kh_; ++a) {
          for (int b = 0; b < kw_; ++b) {
            const S* xr = &x.data[(static_cast<std::size_t>(i + a) * w + (j + b)) * cin_];
            for (int c = 0; c < cin_; ++c) {
              const S xv = xr[c];
              const S* wr =
                  &weights_[((static_cast<std::size_t>(a) * kw_ + b) * cin_ + c) * cout_];
              for (int o = 0; o < cout_; ++o) acc[o] += xv * wr[o];
            }
          }
        }
      }
    }
    return out;
  }

  int kh_, kw_, cin_, cout_;
  std::vector<S> weights_, bias_;
  std::vector<S> weight_grads_, bias_grads_;
  TensorT<S> input_;
  bool has_forward_ = false;
};

// Max pooling over non-overlapping-or-strided windows; ties go to the first
// maximal element in row-major window order.
template <typename S>
class MaxPool2DT final : public LayerT<S> {
 public:
  MaxPool2DT(int window_h = 2, int window_w = 2, int stride = 2)
      : wh_(window_h), ww_(window_w), stride_(stride) {
    if (wh_ < 1 || ww_ < 1 || stride_ < 1)
      throw std::invalid_argument("MaxPool2D: window and stride must be >= 1");
  }

  TensorT<S> forward(const TensorT<S>& x, Mode, Rng*) override {
    check_shape(x.shape);
    in_shape_ = x.shape;
    TensorT<S> out = run(x, &argmax_);
    has_forward_ = true;
    return out;
  }

  TensorT<S> infer(const TensorT<S>& x) const override {
    check_shape(x.shape);
    return run(x, nullptr);
  }

  TensorT<S> backward(const TensorT<S>& grad_out) override {
    this->require_forward(has_forward_, "MaxPool2D");
    has_forward_ = false;
    if (grad_out.size() != argmax_.size())
      throw ShapeError("MaxPool2D backward: upstream gradient " + grad_out.shape_str() +
                       " does not match pooled output");
    TensorT<S> dx(in_shape_);
    for (std::size_t k = 0; k < argmax_.size(); ++k) dx.data[argmax_[k]] += grad_out.data[k];
    return dx;
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    check_shape(in);
    return {(in[0] - wh_) / stride_ + 1, (in[1] - ww_) / stride_ + 1, in[2]};
  }

  std::string kind() const override { return "maxpool2d"; }

  int window_h() const { return wh_; }
  int window_w() const { return ww_; }
  int stride() const { return stride_; }

 private:
  void check_shape(const std::vector<int>& in) const {
    if (in.size() != 3 || in[0] < wh_ || in[1] < ww_)
      throw ShapeError("MaxPool2D: input " + TensorT<S>::shape_str(in) +
                       " smaller than window [" + std::to_string(wh_) + "," +
                       std::to_string(ww_) + "]");
  }

  TensorT<S> run(const TensorT<S>& x, std::vector<std::size_t>* argmax) const {
    const int h = x.shape[0], w = x.shape[1], cc = x.shape[2];
    const int oh = (h - wh_) / stride_ + 1;
    const int ow = (w - ww_) / stride_ + 1;
    TensorT<S> out({oh, ow, cc});
    if (argmax) argmax->assign(out.size(), 0);
    for (int i = 0; i < oh; ++i) {
      for (int j = 0; j < ow; ++j) {
        for (int c = 0; c < cc; ++c) {
          S best = x.at(i * stride_, j * stride_, c);
          std::size_t best_idx =
              (static_cast<std::size_t>(i * stride_) * w + j * stride_) * cc + c;
          for (int a = 0; a < wh_; ++a) {
            for (int b = 0; b < ww_; ++b) {
              const int si = i * stride_ + a, sj = j * stride_ + b;
              const S v = x.at(si, sj, c);
              if (v > best) {
                best = v;
                best_idx = (static_cast<std::size_t>(si) * w + sj) * cc + c;
              }
            }
          }
          out.at(i, j, c) = best;
          if (argmax) (*argmax)[(static_cast<std::size_t>(i) * ow + j) * cc + c] = best_idx;
        }
      }
    }
    return out;
  }

  int wh_, ww_, stride_;
  std::vector<std::size_t> argmax_;
  std::vector<int> in_shape_;
  bool has_forward_ = false;
};

// Inverted dropout: during training each element is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate); inference is the identity.
template <typename S>
class DropoutT final : public LayerT<S> {
 public:
  explicit DropoutT(double rate) : rate_(rate) {
    if (rate_ < 0.0 || rate_ >= 1.0)
      throw std::invalid_argument("Dropout: rate must be in [0, 1)");
  }

  TensorT<S> forward(const TensorT<S>& x, Mode mode, Rng* rng) override {
    has_forward_ = true;
    if (mode == Mode::Infer || rate_ == 0.0) {
      mask_.clear();
      return x;
    }
    if (!rng) throw StateError("Dropout: train-mode forward requires an rng");
    const S keep_scale = static_cast<S>(1.0 / (1.0 - rate_));
    mask_.resize(x.size());
    TensorT<S> out = x;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      mask_[i] = rng->bernoulli(rate_) ? S(0) : keep_scale;
      out.data[i] *= mask_[i];
    }
    return out;
  }

  TensorT<S> infer(const TensorT<S>& x) const override { return x; }

  TensorT<S> backward(const TensorT<S>& grad_out) override {
    this->require_forward(has_forward_, "Dropout");
    has_forward_ = false;
    if (mask_.empty()) return grad_out;
    TensorT<S> dx = grad_out;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask_[i];
    return dx;
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }
  std::string kind() const override { return "dropout"; }
  double rate() const { return rate_; }

 private:
  double rate_;
  std::vector<S> mask_;
  bool has_forward_ = false;
};

template <typename S>
class FlattenT final : public LayerT<S> {
 public:
  TensorT<S> forward(const TensorT<S>& x, Mode, Rng*) override {
    in_shape_ = x.shape;
    has_forward_ = true;
    return TensorT<S>({static_cast<int>(x.size())}, x.data);
  }

  TensorT<S> infer(const TensorT<S>& x) const override {
    return TensorT<S>({static_cast<int>(x.size())}, x.data);
  }

  TensorT<S> backward(const TensorT<S>& grad_out) override {
    this->require_forward(has_forward_, "Flatten");
    has_forward_ = false;
    return TensorT<S>(in_shape_, grad_out.data);
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    return {static_cast<int>(TensorT<S>::count(in))};
  }
  std::string kind() const override { return "flatten"; }

 private:
  std::vector<int> in_shape_;
  bool has_forward_ = false;
};

// Fully connected layer; weights stored [in][out], one bias per output.
template <typename S>
class DenseT final : public LayerT<S> {
 public:
  DenseT(int in_dim, int out_dim) : in_(in_dim), out_(out_dim) {
    if (in_ < 1 || out_ < 1)
      throw std::invalid_argument("Dense: dimensions must be >= 1");
    weights_.assign(static_cast<std::size_t>(in_) * out_, S(0));
    bias_.assign(static_cast<std::size_t>(out_), S(0));
    weight_grads_.assign(weights_.size(), S(0));
    bias_grads_.assign(bias_.size(), S(0));
  }

  void init_he_uniform(Rng& rng) {
    const double limit = std::sqrt(6.0 / in_);
    for (S& w : weights_) w = static_cast<S>(rng.uniform(-limit, limit));
    std::fill(bias_.begin(), bias_.end(), S(0));
  }

  void init_glorot_uniform(Rng& rng) {
    const double limit = std::sqrt(6.0 / (static_cast<double>(in_) + out_));
    for (S& w : weights_) w = static_cast<S>(rng.uniform(-limit, limit));
    std::fill(bias_.begin(), bias_.end(), S(0));
  }

  TensorT<S> forward(const TensorT<S>& x, Mode, Rng*) override {
    check_input(x);
    input_ = x;
    has_forward_ = true;
    return run(x);
  }

  TensorT<S> infer(const TensorT<S>& x) const override {
    check_input(x);
    return run(x);
  }

  TensorT<S> backward(const TensorT<S>& grad_out) override {
    this->require_forward(has_forward_, "Dense");
    has_forward_ = false;
    if (grad_out.shape != std::vector<int>{out_})
      throw ShapeError("Dense backward: upstream gradient " + grad_out.shape_str() +
                       " does not match output [" + std::to_string(out_) + "]");
    TensorT<S> dx({in_});
    for (int o = 0; o < out_; ++o) bias_grads_[o] += grad_out.data[o];
    for (int i = 0; i < in_; ++i) {
      const S xv = input_.data[i];
      const std::size_t base = static_cast<std::size_t>(i) * out_;
      S acc = S(0);
      for (int o = 0; o < out_; ++o) {
        weight_grads_[base + o] += xv * grad_out.data[o];
        acc += weights_[base + o] * grad_out.data[o];
      }
      dx.data[i] = acc;
    }
    return dx;
  }

  void collect_params(std::vector<ParamBlock<S>>& out) override {
    out.push_back({&weights_, &weight_grads_, "dense.weights"});
    out.push_back({&bias_, &bias_grads_, "dense.bias"});
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    check_shape(in);
    return {out_};
  }
  std::string kind() const override { return "dense"; }

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }
  std::vector<S>& weights() { return weights_; }
  std::vector<S>& bias() { return bias_; }

 private:
  void check_shape(const std::vector<int>& in) const {
    if (in.size() != 1 || in[0] != in_)
      throw ShapeError("Dense: input " + TensorT<S>::shape_str(in) +
                       " incompatible with weights [" + std::to_string(in_) + "," +
                       std::to_string(out_) + "]");
  }
  void check_input(const TensorT<S>& x) const { check_shape(x.shape); }

  TensorT<S> run(const TensorT<S>& x) const {
    TensorT<S> out({out_});
    for (int o = 0; o < out_; ++o) out.data[o] = bias_[o];
    for (int i = 0; i < in_; ++i) {
      const S xv = x.data[i];
      const S* wr = &weights_[static_cast<std::size_t>(i) * out_];
      for (int o = 0; o < out_; ++o) out.data[o] += xv * wr[o];
    }
    return out;
  }

  int in_, out_;
  std::vector<S> weights_, bias_;
  std::vector<S> weight_grads_, bias_grads_;
  TensorT<S> input_;
  bool has_forward_ = false;
};

template <typename S>
class ReluT final : public LayerT<S> {
 public:
  TensorT<S> forward(const TensorT<S>& x, Mode, Rng*) override {
    input_ = x;
    has_forward_ = true;
    return relu(x);
  }

  TensorT<S> infer(const TensorT<S>& x) const override { return relu(x); }

  TensorT<S> backward(const TensorT<S>& grad_out) override {
    this->require_forward(has_forward_, "ReLU");
    has_forward_ = false;
    TensorT<S> dx = grad_out;
    for (std::size_t i = 0; i < dx.data.size(); ++i)
      if (input_.data[i] <= S(0)) dx.data[i] = S(0);
    return dx;
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }
  std::string kind() const override { return "relu"; }

 private:
  TensorT<S> input_;
  bool has_forward_ = false;
};

template <typename S>
class SigmoidT final : public LayerT<S> {
 public:
  TensorT<S> forward(const TensorT<S>& x, Mode, Rng*) override {
    output_ = sigmoid(x);
    has_forward_ = true;
    return output_;
  }

  TensorT<S> infer(const TensorT<S>& x) const override { return sigmoid(x); }

  TensorT<S> backward(const TensorT<S>& grad_out) override {
    this->require_forward(has_forward_, "Sigmoid");
    has_forward_ = false;
    TensorT<S> dx = grad_out;
    for (std::size_t i = 0; i < dx.data.size(); ++i) {
      const S y = output_.data[i];
      dx.data[i] *= y * (S(1) - y);
    }
    return dx;
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }
  std::string kind() const override { return "sigmoid"; }

 private:
  TensorT<S> output_;
  bool has_forward_ = false;
};

using Layer = LayerT<float>;
using Conv2D = Conv2DT<float>;
using MaxPool2D = MaxPool2DT<float>;
using Dropout = DropoutT<float>;
using Flatten = FlattenT<float>;
using Dense = DenseT<float>;
using Relu = ReluT<float>;
using Sigmoid = SigmoidT<float>;

}  // namespace drowsy::nn
