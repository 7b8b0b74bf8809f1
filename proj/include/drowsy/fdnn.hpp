#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drowsy/eye_sample.hpp"
#include "drowsy/layers.hpp"
#include "drowsy/sgd.hpp"

namespace drowsy {

inline constexpr int kEyeInputSide = 24;
inline constexpr int kEyeInputPixels = kEyeInputSide * kEyeInputSide;

// Learnable parameters of the default (single-channel) stack:
// conv 3x3x1x32 + 32, dense 3872x512 + 512, dense 512x2 + 2.
inline constexpr std::size_t kFdnnParamCount = 1'984'322;

struct Prediction {
  float p_closed = 0.0f;
  float p_open = 0.0f;
  EyeLabel label = EyeLabel::Open;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

struct FdnnMeta {
  std::uint64_t seed = 0;
  int epochs_trained = 0;
  std::string config_digest;
};

// The eye-state classifier: Conv2D(3x3, 1->32) -> ReLU -> MaxPool(2x2) ->
// Dropout(0.25) -> Flatten -> Dense(3872->512) -> ReLU -> Dense(512->2) ->
// Sigmoid, on a 24x24 grayscale input in [0, 1]. Output unit 0 is the
// closed-eye score, unit 1 the open-eye score.
class FdnnModel {
 public:
  struct Options {
    // Replicates the gray channel three times (conv becomes 3x3x3x32), for
    // comparison experiments against RGB-input setups.
    bool rgb_compat = false;
  };

  explicit FdnnModel(std::uint64_t seed) : FdnnModel(seed, Options{}) {}
  FdnnModel(std::uint64_t seed, Options opt);

  FdnnModel(FdnnModel&&) noexcept = default;
  FdnnModel& operator=(FdnnModel&&) noexcept = default;

  // pixels: 576 values in [0, 1]. Deterministic, thread-safe on a const model.
  Prediction predict(std::span<const float> pixels) const;

  // Runs cfg.epochs of shuffled mini-batch SGD and records per-epoch train
  // loss and validation accuracy. The final-epoch weights are kept; there is
  // no early stopping. Throws NumericError if the loss goes non-finite.
  TrainHistory train(std::span<const EyeSample> train_set,
                     std::span<const EyeSample> val_set, const nn::SgdConfig& cfg);

  double accuracy(std::span<const EyeSample> set) const;

  // "FDNN" magic, u32 version, length-prefixed JSON metadata, then all
  // parameter tensors as little-endian f32 in layer order (weights, bias).
  std::vector<std::uint8_t> save_weights() const;
  static FdnnModel load_weights(std::span<const std::uint8_t> bytes);

  std::size_t param_count() const;

  // (layer kind, output shape) pairs for the nominal 24x24 input.
  std::vector<std::pair<std::string, std::vector<int>>> shape_chain() const;

  const FdnnMeta& meta() const { return meta_; }
  nn::Mode mode() const { return mode_; }
  int input_channels() const { return cin_; }

 private:
  struct LoadTag {};
  FdnnModel(LoadTag, int cin);

  void build(std::uint64_t seed);
  nn::Tensor input_tensor(std::span<const float> pixels) const;
  nn::Tensor forward_infer(std::span<const float> pixels) const;
  std::vector<nn::ParamBlock<float>> param_blocks();

  int cin_ = 1;
  std::vector<std::unique_ptr<nn::Layer>> layers_;
  FdnnMeta meta_;
  nn::Mode mode_ = nn::Mode::Infer;
};

}  // namespace drowsy
