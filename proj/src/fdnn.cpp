#include "drowsy/fdnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "drowsy/loss.hpp"
#include "json.hpp"

namespace drowsy {

using nn::Mode;
using nn::Tensor;
using json = nlohmann::json;

namespace {

constexpr std::uint32_t kWeightsVersion = 1;
constexpr char kMagic[4] = {'F', 'D', 'N', 'N'};

void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(std::span<const std::uint8_t> bytes, std::size_t at) {
  return static_cast<std::uint32_t>(bytes[at]) |
         (static_cast<std::uint32_t>(bytes[at + 1]) << 8) |
         (static_cast<std::uint32_t>(bytes[at + 2]) << 16) |
         (static_cast<std::uint32_t>(bytes[at + 3]) << 24);
}

void put_f32_le(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32_le(out, bits);
}

float get_f32_le(std::span<const std::uint8_t> bytes, std::size_t at) {
  const std::uint32_t bits = get_u32_le(bytes, at);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

Tensor one_hot(EyeLabel label) {
  Tensor t({2});
  t.data[label == EyeLabel::Closed ? 0 : 1] = 1.0f;
  return t;
}

json layer_descriptors(const std::vector<std::unique_ptr<nn::Layer>>& layers) {
  json descriptors = json::array();
  for (const auto& layer : layers) {
    json j{{"kind", layer->kind()}};
    if (auto* conv = dynamic_cast<nn::Conv2D*>(layer.get())) {
      j["kernel"] = {conv->kernel_h(), conv->kernel_w()};
      j["in_channels"] = conv->in_channels();
      j["out_channels"] = conv->out_channels();
    } else if (auto* pool = dynamic_cast<nn::MaxPool2D*>(layer.get())) {
      j["window"] = {pool->window_h(), pool->window_w()};
      j["stride"] = pool->stride();
    } else if (auto* drop = dynamic_cast<nn::Dropout*>(layer.get())) {
      j["rate"] = drop->rate();
    } else if (auto* dense = dynamic_cast<nn::Dense*>(layer.get())) {
      j["in"] = dense->in_dim();
      j["out"] = dense->out_dim();
    }
    descriptors.push_back(std::move(j));
  }
  return descriptors;
}

}  // namespace

FdnnModel::FdnnModel(std::uint64_t seed, Options opt) : cin_(opt.rgb_compat ? 3 : 1) {
  build(seed);
}

FdnnModel::FdnnModel(LoadTag, int cin) : cin_(cin) { build(0); }

void FdnnModel::build(std::uint64_t seed) {
  Rng rng(seed);
  const int flat = 11 * 11 * 32;

  auto conv = std::make_unique<nn::Conv2D>(3, 3, cin_, 32);
  conv->init_he_uniform(rng);
  auto dense1 = std::make_unique<nn::Dense>(flat, 512);
  dense1->init_he_uniform(rng);
  auto dense2 = std::make_unique<nn::Dense>(512, 2);
  dense2->init_glorot_uniform(rng);

  layers_.clear();
  layers_.push_back(std::move(conv));
  layers_.push_back(std::make_unique<nn::Relu>());
  layers_.push_back(std::make_unique<nn::MaxPool2D>(2, 2, 2));
  layers_.push_back(std::make_unique<nn::Dropout>(0.25));
  layers_.push_back(std::make_unique<nn::Flatten>());
  layers_.push_back(std::move(dense1));
  layers_.push_back(std::make_unique<nn::Relu>());
  layers_.push_back(std::move(dense2));
  layers_.push_back(std::make_unique<nn::Sigmoid>());

  meta_.seed = seed;
  meta_.epochs_trained = 0;
  meta_.config_digest.clear();
  mode_ = Mode::Infer;
}

Tensor FdnnModel::input_tensor(std::span<const float> pixels) const {
  if (pixels.size() != static_cast<std::size_t>(kEyeInputPixels))
    throw ShapeError("FdnnModel: expected " + std::to_string(kEyeInputPixels) +
                     " input pixels, got " + std::to_string(pixels.size()));
  Tensor x({kEyeInputSide, kEyeInputSide, cin_});
  for (int i = 0; i < kEyeInputPixels; ++i)
    for (int c = 0; c < cin_; ++c) x.data[static_cast<std::size_t>(i) * cin_ + c] = pixels[i];
  return x;
}

Tensor FdnnModel::forward_infer(std::span<const float> pixels) const {
  Tensor x = input_tensor(pixels);
  for (const auto& layer : layers_) x = layer->infer(x);
  return x;
}

Prediction FdnnModel::predict(std::span<const float> pixels) const {
  if (mode_ != Mode::Infer)
    throw StateError("FdnnModel::predict requires inference mode");
  const Tensor out = forward_infer(pixels);
  Prediction p;
  p.p_closed = out.data[0];
  p.p_open = out.data[1];
  p.label = out.data[0] >= out.data[1] ? EyeLabel::Closed : EyeLabel::Open;
  return p;
}

double FdnnModel::accuracy(std::span<const EyeSample> set) const {
  if (set.empty()) throw DataError("accuracy: empty sample set");
  std::size_t correct = 0;
  for (const EyeSample& s : set) {
    const Tensor out = forward_infer(s.pixels);
    const EyeLabel label = out.data[0] >= out.data[1] ? EyeLabel::Closed : EyeLabel::Open;
    if (label == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

std::vector<nn::ParamBlock<float>> FdnnModel::param_blocks() {
  std::vector<nn::ParamBlock<float>> blocks;
  for (auto& layer : layers_) layer->collect_params(blocks);
  return blocks;
}

TrainHistory FdnnModel::train(std::span<const EyeSample> train_set,
                              std::span<const EyeSample> val_set,
                              const nn::SgdConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw DataError("train: empty training set");
  if (val_set.empty()) throw DataError("train: empty validation set");

  mode_ = Mode::Train;
  Rng rng(cfg.seed);
  nn::SgdOptimizer optimizer(cfg.learning_rate, cfg.momentum);
  std::vector<nn::ParamBlock<float>> blocks = param_blocks();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainHistory history;
  history.epochs.reserve(cfg.epochs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t bn = end - start;

      for (auto& layer : layers_) layer->zero_grads();

      for (std::size_t k = start; k < end; ++k) {
        const EyeSample& sample = train_set[order[k]];
        Tensor x = input_tensor(sample.pixels);
        for (auto& layer : layers_) x = layer->forward(x, Mode::Train, &rng);

        auto [loss, grad] = nn::cross_entropy(x, one_hot(sample.label));
        if (!std::isfinite(loss))
          throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch starting at sample " + std::to_string(start));
        loss_sum += loss;

        Tensor g = std::move(grad);
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
          g = (*it)->backward(g);
      }

      const float inv_bn = 1.0f / static_cast<float>(bn);
      for (auto& b : blocks)
        for (float& gv : *b.grads) gv *= inv_bn;
      optimizer.step(blocks);
    }

    history.epochs.push_back(
        {loss_sum / static_cast<double>(train_set.size()), accuracy(val_set)});
  }

  meta_.epochs_trained += cfg.epochs;
  meta_.config_digest = cfg.digest();
  mode_ = Mode::Infer;
  return history;
}

std::size_t FdnnModel::param_count() const {
  std::size_t n = 0;
  std::vector<nn::ParamBlock<float>> blocks;
  for (const auto& layer : layers_)
    const_cast<nn::Layer&>(*layer).collect_params(blocks);
  for (const auto& b : blocks) n += b.values->size();
  return n;
}

std::vector<std::pair<std::string, std::vector<int>>> FdnnModel::shape_chain() const {
  std::vector<std::pair<std::string, std::vector<int>>> chain;
  std::vector<int> shape{kEyeInputSide, kEyeInputSide, cin_};
  for (const auto& layer : layers_) {
    shape = layer->output_shape(shape);
    chain.emplace_back(layer->kind(), shape);
  }
  return chain;
}

std::vector<std::uint8_t> FdnnModel::save_weights() const {
  const json meta{{"config_digest", meta_.config_digest},
                  {"epochs_trained", meta_.epochs_trained},
                  {"input", {kEyeInputSide, kEyeInputSide, cin_}},
                  {"layers", layer_descriptors(layers_)},
                  {"seed", meta_.seed}};
  const std::string meta_str = meta.dump();

  std::vector<std::uint8_t> out;
  out.reserve(12 + meta_str.size() + 4 * param_count());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32_le(out, kWeightsVersion);
  put_u32_le(out, static_cast<std::uint32_t>(meta_str.size()));
  out.insert(out.end(), meta_str.begin(), meta_str.end());

  std::vector<nn::ParamBlock<float>> blocks;
  for (const auto& layer : layers_)
    const_cast<nn::Layer&>(*layer).collect_params(blocks);
  for (const auto& b : blocks)
    for (float v : *b.values) put_f32_le(out, v);
  return out;
}

FdnnModel FdnnModel::load_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DataError("load_weights: bad magic, not an FDNN weight file");
  const std::uint32_t version = get_u32_le(bytes, 4);
  if (version != kWeightsVersion)
    throw DataError("load_weights: unsupported version " + std::to_string(version) +
                    ", expected " + std::to_string(kWeightsVersion));
  const std::uint32_t meta_len = get_u32_le(bytes, 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(meta_len))
    throw DataError("load_weights: truncated metadata block");

  json meta;
  try {
    meta = json::parse(bytes.begin() + 12, bytes.begin() + 12 + meta_len);
  } catch (const json::exception& e) {
    throw DataError(std::string("load_weights: bad metadata JSON: ") + e.what());
  }

  int cin = 1;
  try {
    const auto input = meta.at("input");
    if (input.size() != 3 || input[0] != kEyeInputSide || input[1] != kEyeInputSide)
      throw DataError("load_weights: unsupported input shape in metadata");
    cin = input[2];
  } catch (const json::exception& e) {
    throw DataError(std::string("load_weights: bad metadata: ") + e.what());
  }
  if (cin != 1 && cin != 3)
    throw DataError("load_weights: unsupported channel count " + std::to_string(cin));

  FdnnModel model(LoadTag{}, cin);

  try {
    // The stored layer descriptors must match the architecture exactly.
    if (meta.at("layers") != layer_descriptors(model.layers_))
      throw DataError("load_weights: layer metadata does not match the FDNN architecture");
    model.meta_.seed = meta.at("seed");
    model.meta_.epochs_trained = meta.at("epochs_trained");
    model.meta_.config_digest = meta.at("config_digest");
  } catch (const json::exception& e) {
    throw DataError(std::string("load_weights: bad metadata: ") + e.what());
  }

  const std::size_t payload_at = 12 + meta_len;
  const std::size_t expected_payload = 4 * model.param_count();
  if (bytes.size() < payload_at + expected_payload)
    throw DataError("load_weights: truncated parameter payload: expected " +
                    std::to_string(expected_payload) + " bytes, have " +
                    std::to_string(bytes.size() - payload_at));
  if (bytes.size() > payload_at + expected_payload)
    throw DataError("load_weights: unexpected trailing bytes after parameters");

  std::size_t at = payload_at;
  std::vector<nn::ParamBlock<float>> blocks = model.param_blocks();
  for (auto& b : blocks)
    for (float& v : *b.values) {
      v = get_f32_le(bytes, at);
      at += 4;
    }
  return model;
}

}  // namespace drowsy
