#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "drowsy/layers.hpp"
#include "drowsy/loss.hpp"
#include "drowsy/sgd.hpp"
#include "support/grad_check.hpp"

using namespace drowsy;
using nn::Mode;
using nn::Tensor;

TEST_CASE("conv2d with a 1x1 identity kernel is the identity") {
  nn::Conv2D conv(1, 1, 1, 1);
  conv.weights()[0] = 1.0f;
  Rng rng(1);
  const Tensor x = gradcheck::smooth_input({5, 4, 1}, rng);
  const Tensor y = conv.infer(x);
  CHECK(y.shape == std::vector<int>{5, 4, 1});
  CHECK(y.data == x.data);
}

TEST_CASE("conv2d all-ones 3x3 kernel sums the window") {
  nn::Conv2D conv(3, 3, 1, 1);
  for (float& w : conv.weights()) w = 1.0f;
  const Tensor x({6, 6, 1}, std::vector<float>(36, 1.0f));
  const Tensor y = conv.infer(x);
  CHECK(y.shape == std::vector<int>{4, 4, 1});
  for (float v : y.data) CHECK(v == doctest::Approx(9.0f));
}

TEST_CASE("conv2d shape arithmetic for the eye classifier input") {
  nn::Conv2D conv(3, 3, 1, 32);
  CHECK(conv.output_shape({24, 24, 1}) == std::vector<int>{22, 22, 32});
  CHECK_THROWS_AS(conv.output_shape({24, 24, 3}), ShapeError);
  CHECK_THROWS_AS(conv.output_shape({2, 24, 1}), ShapeError);

  try {
    conv.output_shape({24, 24, 3});
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[24,24,3]") != std::string::npos);  // both shapes named
    CHECK(msg.find("[3,3,1,32]") != std::string::npos);
  }
}

TEST_CASE("maxpool picks window maxima and halves the extent") {
  nn::MaxPool2D pool(2, 2, 2);
  const Tensor x({2, 2, 1}, {1, 2, 3, 4});
  const Tensor y = pool.infer(x);
  CHECK(y.data == std::vector<float>{4});

  const Tensor flat({6, 6, 2}, std::vector<float>(72, 0.5f));
  const Tensor pooled = pool.infer(flat);
  CHECK(pooled.shape == std::vector<int>{3, 3, 2});
  for (float v : pooled.data) CHECK(v == 0.5f);

  CHECK(pool.output_shape({22, 22, 32}) == std::vector<int>{11, 11, 32});
}

TEST_CASE("maxpool ties route the gradient to the first maximal element") {
  nn::MaxPool2D pool(2, 2, 2);
  const Tensor x({2, 2, 1}, {7, 7, 7, 7});
  pool.forward(x, Mode::Train, nullptr);
  const Tensor dx = pool.backward(Tensor({1, 1, 1}, {1.0f}));
  CHECK(dx.data == std::vector<float>{1, 0, 0, 0});
}

TEST_CASE("dropout is the identity at inference and at rate 0") {
  Rng rng(2);
  const Tensor x = gradcheck::smooth_input({8, 8, 2}, rng);

  nn::Dropout quarter(0.25);
  CHECK(quarter.infer(x).data == x.data);
  CHECK(quarter.forward(x, Mode::Infer, nullptr).data == x.data);

  nn::Dropout off(0.0);
  Rng mask_rng(3);
  CHECK(off.forward(x, Mode::Train, &mask_rng).data == x.data);

  CHECK_THROWS_AS(nn::Dropout(1.0), std::invalid_argument);
  CHECK_THROWS_AS(quarter.forward(x, Mode::Train, nullptr), StateError);
}

TEST_CASE("inverted dropout keeps the mean within 2%") {
  Rng rng(4);
  Tensor x({64, 64, 4});
  for (float& v : x.data) v = rng.uniform_f(0.5f, 1.5f);

  nn::Dropout drop(0.25);
  Rng mask_rng(5);
  const Tensor y = drop.forward(x, Mode::Train, &mask_rng);

  double in_mean = 0.0, out_mean = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    in_mean += x.data[i];
    out_mean += y.data[i];
  }
  CHECK(std::abs(out_mean / in_mean - 1.0) < 0.02);
}

TEST_CASE("relu and sigmoid elementwise values") {
  const Tensor x({4}, {-3.0f, 0.0f, 3.0f, 0.5f});
  const Tensor r = nn::relu(x);
  CHECK(r.data == std::vector<float>{0, 0, 3.0f, 0.5f});

  const Tensor s = nn::sigmoid(Tensor({1}, {0.0f}));
  CHECK(s.data[0] == doctest::Approx(0.5f));
}

TEST_CASE("sigmoid is strictly monotone") {
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    float a = rng.uniform_f(-8.0f, 8.0f);
    float b = rng.uniform_f(-8.0f, 8.0f);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const Tensor s = nn::sigmoid(Tensor({2}, {a, b}));
    CHECK(s.data[0] < s.data[1]);
  }
}

TEST_CASE("relu backward is zero at negative inputs") {
  nn::Relu relu_layer;
  const Tensor x({3}, {-2.0f, -0.1f, 1.5f});
  relu_layer.forward(x, Mode::Train, nullptr);
  const Tensor dx = relu_layer.backward(Tensor({3}, {1.0f, 1.0f, 1.0f}));
  CHECK(dx.data == std::vector<float>{0, 0, 1.0f});
}

TEST_CASE("backward before forward is a state error") {
  nn::Relu relu_layer;
  CHECK_THROWS_AS(relu_layer.backward(Tensor({1}, {1.0f})), StateError);
  nn::Conv2D conv(3, 3, 1, 2);
  CHECK_THROWS_AS(conv.backward(Tensor({1, 1, 2})), StateError);
}

TEST_CASE("zero upstream gradient produces zero gradients everywhere") {
  Rng rng(7);
  nn::Dense dense(6, 4);
  dense.init_he_uniform(rng);
  const Tensor x = gradcheck::smooth_input({6}, rng);
  dense.zero_grads();
  dense.forward(x, Mode::Train, nullptr);
  const Tensor dx = dense.backward(Tensor({4}));
  for (float v : dx.data) CHECK(v == 0.0f);
  std::vector<nn::ParamBlock<float>> blocks;
  dense.collect_params(blocks);
  for (const auto& b : blocks)
    for (float g : *b.grads) CHECK(g == 0.0f);
}

TEST_CASE("cross_entropy hand values") {
  const auto perfect = nn::cross_entropy(Tensor({2}, {1.0f, 0.0f}), Tensor({2}, {1.0f, 0.0f}));
  CHECK(perfect.value <= 1e-6f);

  const auto half = nn::cross_entropy(Tensor({2}, {0.5f, 0.5f}), Tensor({2}, {1.0f, 0.0f}));
  CHECK(half.value == doctest::Approx(std::log(2.0)).epsilon(1e-5));

  // symmetric under a simultaneous class swap
  const auto a = nn::cross_entropy(Tensor({2}, {0.8f, 0.3f}), Tensor({2}, {1.0f, 0.0f}));
  const auto b = nn::cross_entropy(Tensor({2}, {0.3f, 0.8f}), Tensor({2}, {0.0f, 1.0f}));
  CHECK(a.value == doctest::Approx(b.value));

  CHECK_THROWS_AS(nn::cross_entropy(Tensor({2}, {0.5f, 0.5f}), Tensor({2}, {1.0f, 1.0f})),
                  std::invalid_argument);
  CHECK_THROWS_AS(nn::cross_entropy(Tensor({2}, {0.5f, 0.5f}), Tensor({2}, {0.5f, 0.5f})),
                  std::invalid_argument);
}

TEST_CASE("cross_entropy gradient matches finite differences") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor pred({2}, {rng.uniform_f(0.05f, 0.95f), rng.uniform_f(0.05f, 0.95f)});
    const bool first_hot = rng.bernoulli(0.5);
    const Tensor target({2}, {first_hot ? 1.0f : 0.0f, first_hot ? 0.0f : 1.0f});

    nn::TensorT<double> pd = pred.cast<double>();
    const nn::TensorT<double> td = target.cast<double>();
    const auto analytic = nn::cross_entropy(pd, td);

    const double eps = 1e-6;
    for (int k = 0; k < 2; ++k) {
      const double orig = pd.data[k];
      pd.data[k] = orig + eps;
      const double lp = nn::cross_entropy(pd, td).value;
      pd.data[k] = orig - eps;
      const double lm = nn::cross_entropy(pd, td).value;
      pd.data[k] = orig;
      const double fd = (lp - lm) / (2.0 * eps);
      CHECK(gradcheck::rel_err(analytic.grad.data[k], fd, 1e-6) < 1e-5);
    }
  }
}

TEST_CASE("sgd_step applies w <- w - lr*g") {
  std::vector<float> w{1.0f};
  std::vector<float> g{0.5f};
  nn::sgd_step<float>(w, g, 0.01);
  CHECK(w[0] == doctest::Approx(0.995f));

  std::vector<float> zero{0.0f};
  nn::sgd_step<float>(w, zero, 10.0);
  CHECK(w[0] == doctest::Approx(0.995f));

  std::vector<float> wrong{1.0f, 2.0f};
  CHECK_THROWS_AS(nn::sgd_step<float>(w, wrong, 0.1), ShapeError);
}

TEST_CASE("two zero-momentum steps equal one step with summed gradients") {
  std::vector<float> w_two{1.0f};
  const std::vector<float> g{0.25f};
  nn::sgd_step<float>(w_two, g, 0.01);
  nn::sgd_step<float>(w_two, g, 0.01);

  std::vector<float> w_one{1.0f};
  const std::vector<float> g2{0.5f};
  nn::sgd_step<float>(w_one, g2, 0.01);
  CHECK(w_two[0] == doctest::Approx(w_one[0]));
}

TEST_CASE("classical momentum follows its closed form for two steps") {
  std::vector<float> w{1.0f};
  std::vector<float> g{0.5f};
  std::vector<float> grads = g;
  std::vector<nn::ParamBlock<float>> blocks{{&w, &grads, "w"}};

  const double lr = 0.1, mu = 0.9;
  nn::SgdOptimizer opt(lr, mu);
  opt.step(blocks);  // v1 = -lr*g,        w1 = w0 + v1
  opt.step(blocks);  // v2 = mu*v1 - lr*g, w2 = w1 + v2

  const double v1 = -lr * 0.5;
  const double v2 = mu * v1 - lr * 0.5;
  CHECK(w[0] == doctest::Approx(1.0 + v1 + v2));
}

TEST_CASE("gradient checks: every layer kind on random small shapes") {
  Rng rng(42);

  SUBCASE("conv2d") {
    for (int trial = 0; trial < 5; ++trial) {
      const int kh = 1 + static_cast<int>(rng.below(3));
      const int kw = 1 + static_cast<int>(rng.below(3));
      const int cin = 1 + static_cast<int>(rng.below(3));
      const int cout = 1 + static_cast<int>(rng.below(4));
      const int h = kh + static_cast<int>(rng.below(5));
      const int w = kw + static_cast<int>(rng.below(5));
      nn::Conv2D lf(kh, kw, cin, cout);
      lf.init_he_uniform(rng);
      nn::Conv2DT<double> ld(kh, kw, cin, cout);
      const Tensor x = gradcheck::smooth_input({h, w, cin}, rng);
      const auto res = gradcheck::check_layer(lf, ld, x, rng);
      CAPTURE(res.max_rel32);
      CAPTURE(res.max_rel64);
      CHECK(res.ok());
    }
  }

  SUBCASE("dense") {
    for (int trial = 0; trial < 5; ++trial) {
      const int in = 2 + static_cast<int>(rng.below(12));
      const int out = 1 + static_cast<int>(rng.below(8));
      nn::Dense lf(in, out);
      lf.init_he_uniform(rng);
      nn::DenseT<double> ld(in, out);
      const Tensor x = gradcheck::smooth_input({in}, rng);
      CHECK(gradcheck::check_layer(lf, ld, x, rng).ok());
    }
  }

  SUBCASE("maxpool") {
    for (int trial = 0; trial < 5; ++trial) {
      const int c = 1 + static_cast<int>(rng.below(3));
      const int h = 2 + static_cast<int>(rng.below(6));
      const int w = 2 + static_cast<int>(rng.below(6));
      nn::MaxPool2D lf(2, 2, 2);
      nn::MaxPool2DT<double> ld(2, 2, 2);
      const Tensor x = gradcheck::ladder_input({h, w, c}, rng);
      CHECK(gradcheck::check_layer(lf, ld, x, rng).ok());
    }
  }

  SUBCASE("relu") {
    for (int trial = 0; trial < 5; ++trial) {
      nn::Relu lf;
      nn::ReluT<double> ld;
      const Tensor x = gradcheck::ladder_input({3 + static_cast<int>(rng.below(6)),
                                                3 + static_cast<int>(rng.below(6)), 2},
                                               rng);
      CHECK(gradcheck::check_layer(lf, ld, x, rng).ok());
    }
  }

  SUBCASE("sigmoid") {
    for (int trial = 0; trial < 5; ++trial) {
      nn::Sigmoid lf;
      nn::SigmoidT<double> ld;
      const Tensor x = gradcheck::smooth_input({2 + static_cast<int>(rng.below(8)), 2, 2}, rng);
      CHECK(gradcheck::check_layer(lf, ld, x, rng).ok());
    }
  }

  SUBCASE("dropout") {
    for (int trial = 0; trial < 5; ++trial) {
      nn::Dropout lf(0.25);
      nn::DropoutT<double> ld(0.25);
      const Tensor x = gradcheck::smooth_input({4, 4, 2}, rng);
      CHECK(gradcheck::check_layer(lf, ld, x, rng, 1e-3, 7000 + trial).ok());
    }
  }

  SUBCASE("flatten") {
    nn::Flatten lf;
    nn::FlattenT<double> ld;
    const Tensor x = gradcheck::smooth_input({3, 4, 2}, rng);
    CHECK(gradcheck::check_layer(lf, ld, x, rng).ok());
  }
}

TEST_CASE("full-batch SGD on a separable toy set decreases the loss monotonically") {
  Rng rng(10);

  // Two linearly separable 2-D blobs.
  const int n = 24;
  std::vector<Tensor> xs;
  std::vector<Tensor> targets;
  for (int i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    const float cx = pos ? 1.5f : -1.5f;
    xs.push_back(Tensor({2}, {cx + rng.uniform_f(-0.5f, 0.5f),
                              cx + rng.uniform_f(-0.5f, 0.5f)}));
    targets.push_back(Tensor({2}, {pos ? 1.0f : 0.0f, pos ? 0.0f : 1.0f}));
  }

  nn::Dense dense1(2, 8);
  dense1.init_he_uniform(rng);
  nn::Relu act;
  nn::Dense dense2(8, 2);
  dense2.init_glorot_uniform(rng);
  nn::Sigmoid out_act;
  std::vector<nn::LayerT<float>*> net{&dense1, &act, &dense2, &out_act};

  std::vector<nn::ParamBlock<float>> blocks;
  for (auto* layer : net) layer->collect_params(blocks);
  nn::SgdOptimizer opt(0.05, 0.0);

  std::vector<double> epoch_loss;
  for (int epoch = 0; epoch < 50; ++epoch) {
    for (auto* layer : net) layer->zero_grads();
    double loss_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      Tensor x = xs[i];
      for (auto* layer : net) x = layer->forward(x, Mode::Train, nullptr);
      auto [loss, grad] = nn::cross_entropy(x, targets[i]);
      loss_sum += loss;
      Tensor g = std::move(grad);
      for (auto it = net.rbegin(); it != net.rend(); ++it) g = (*it)->backward(g);
    }
    for (auto& b : blocks)
      for (float& gv : *b.grads) gv /= static_cast<float>(n);
    opt.step(blocks);
    epoch_loss.push_back(loss_sum / n);
  }

  for (std::size_t e = 1; e < epoch_loss.size(); ++e)
    CHECK(epoch_loss[e] <= epoch_loss[e - 1] + 1e-9);
  CHECK(epoch_loss.back() < epoch_loss.front());
}
