#include <doctest.h>

#include <cmath>
#include <random>

#include "csiae/errors.hpp"
#include "csiae/neural.hpp"
#include "support/gradcheck.hpp"

using namespace csiae;

namespace {

Matrix random_matrix(int r, int c, Rng& rng) {
  std::normal_distribution<double> d;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

ModelParams random_model(std::vector<int> widths, Activation hidden, Rng& rng) {
  ModelParams m = make_mlp(widths, hidden, Activation::linear, rng);
  std::normal_distribution<double> d(0.0, 0.3);
  for (auto& l : m.layers) {
    for (Eigen::Index i = 0; i < l.biases.size(); ++i) l.biases(i) = d(rng);
  }
  return m;
}

double leaky(double v) { return v > 0 ? v : kLeakySlope * v; }

}  // namespace

TEST_CASE("forward basics") {
  ModelParams id;
  id.layers.emplace_back(4, 4, Activation::linear);
  id.layers[0].weights.setIdentity();
  const Vector x = Vector::LinSpaced(4, -1.0, 2.0);
  CHECK(forward(id, x) == x);

  for (auto act : {Activation::linear, Activation::leaky_relu, Activation::tanh}) {
    ModelParams z;
    z.layers.emplace_back(3, 5, act);
    z.layers.emplace_back(5, 2, act);
    CHECK(forward(z, Vector(Vector::Ones(3))).isZero(0.0));
  }
  CHECK_THROWS_AS(forward(id, Vector(Vector::Ones(3))), ArgumentError);
}

TEST_CASE("forward matches a straight-line re-evaluation") {
  Rng rng(17);
  const ModelParams m = random_model({6, 5, 3}, Activation::leaky_relu, rng);
  const Vector x = random_matrix(6, 1, rng).col(0);
  const auto& l0 = m.layers[0];
  const auto& l1 = m.layers[1];
  std::vector<double> h(5);
  for (int i = 0; i < 5; ++i) {
    double s = l0.biases(i);
    for (int j = 0; j < 6; ++j) s += l0.weights(i, j) * x(j);
    h[i] = leaky(s);
  }
  const Vector y = forward(m, x);
  for (int i = 0; i < 3; ++i) {
    double s = l1.biases(i);
    for (int j = 0; j < 5; ++j) s += l1.weights(i, j) * h[j];
    CHECK(std::abs(y(i) - s) <= 1e-12);
  }
}

TEST_CASE("apply_mask") {
  const Vector z = Vector::LinSpaced(32, 1.0, 32.0);
  CHECK(apply_mask(z, MaskVector(32, 32)) == z);
  CHECK(apply_mask(z, MaskVector(0, 32)).isZero(0.0));
  const Vector m = apply_mask(Vector(Vector::Ones(32)), MaskVector(8, 32));
  for (int i = 0; i < 32; ++i) CHECK(m(i) == (i < 8 ? 1.0 : 0.0));
  CHECK(MaskVector(8, 32).as_vector() == m);
  CHECK_THROWS_AS(apply_mask(Vector(Vector::Ones(31)), MaskVector(8, 32)), ArgumentError);
  CHECK_THROWS_AS(MaskVector(33, 32), ArgumentError);

  // Linearity holds exactly: masked entries are copies or zeros.
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_matrix(16, 1, rng).col(0);
    const Vector y = random_matrix(16, 1, rng).col(0);
    const double a = 1.5, b = -0.25;
    const MaskVector mk(t % 17, 16);
    CHECK(apply_mask(Vector(a * x + b * y), mk) == Vector(a * apply_mask(x, mk) + b * apply_mask(y, mk)));
  }
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(5);
  ModelParams enc = random_model({7, 6, 5}, Activation::leaky_relu, rng);
  ModelParams dec = random_model({5, 4, 7}, Activation::tanh, rng);
  const Matrix x = random_matrix(7, 3, rng);
  const Matrix c = random_matrix(7, 3, rng);
  const auto r = testing::check_masked_autoencoder(enc, dec, 5, x, c);
  CHECK(r.checked > 100);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("masked latent rows receive exactly zero gradient") {
  Rng rng(8);
  ModelParams enc = random_model({12, 10, 32}, Activation::leaky_relu, rng);
  ModelParams dec = random_model({32, 10, 12}, Activation::leaky_relu, rng);
  const Matrix x = random_matrix(12, 4, rng);
  const Matrix c = random_matrix(12, 4, rng);
  const auto r = testing::check_masked_autoencoder(enc, dec, 8, x, c);
  CHECK(r.masked_rows_zero);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("property: random shapes and activations") {
  Rng rng(321);
  std::uniform_int_distribution<int> width(1, 6);
  for (int trial = 0; trial < 25; ++trial) {
    const int in = width(rng), hid = width(rng), lmax = width(rng);
    const Activation acts[] = {Activation::linear, Activation::leaky_relu, Activation::tanh};
    ModelParams enc = random_model({in, hid, lmax}, acts[trial % 3], rng);
    ModelParams dec = random_model({lmax, hid + 1, in}, acts[(trial + 1) % 3], rng);
    const int lambda = std::uniform_int_distribution<int>(0, lmax)(rng);
    const Matrix x = random_matrix(in, 2, rng);
    const Matrix c = random_matrix(in, 2, rng);
    const auto r = testing::check_masked_autoencoder(enc, dec, lambda, x, c);
    CHECK(r.max_rel_error < 1e-4);
    CHECK(r.masked_rows_zero);
  }
}

TEST_CASE("frozen units get zero gradient and never move") {
  Rng rng(3);
  ModelParams m = random_model({5, 4, 3}, Activation::leaky_relu, rng);
  m.layers[0].set_trainable(false);
  m.layers[1].set_trainable_rows(0, 1, false);
  const Matrix x = random_matrix(5, 6, rng);
  const ModelParams before = m;
  OptimizerState st = OptimizerState::for_model(m);
  for (int step = 0; step < 50; ++step) {
    ForwardCache c;
    forward(m, x, &c);
    const auto br = backward(m, random_matrix(3, 6, rng), c);
    CHECK(br.grads.weights[0].isZero(0.0));
    CHECK(br.grads.biases[0].isZero(0.0));
    CHECK(br.grads.weights[1].row(0).isZero(0.0));
    optimizer_step(m, br.grads, st);
  }
  CHECK(m.layers[0].weights == before.layers[0].weights);
  CHECK(m.layers[0].biases == before.layers[0].biases);
  CHECK(m.layers[1].weights.row(0) == before.layers[1].weights.row(0));
  CHECK(m.layers[1].biases(0) == before.layers[1].biases(0));
  CHECK(m.layers[1].weights.row(1) != before.layers[1].weights.row(1));
}

TEST_CASE("stale cache is rejected") {
  Rng rng(1);
  ModelParams m = random_model({3, 2}, Activation::linear, rng);
  ForwardCache c;
  forward(m, random_matrix(3, 2, rng), &c);
  const auto br = backward(m, Matrix::Ones(2, 2), c);
  OptimizerState st = OptimizerState::for_model(m);
  optimizer_step(m, br.grads, st);
  CHECK_THROWS_AS(backward(m, Matrix::Ones(2, 2), c), UsageError);
  ModelParams copy = m;
  forward(m, random_matrix(3, 2, rng), &c);
  CHECK_THROWS_AS(backward(copy, Matrix::Ones(2, 2), c), UsageError);
  ForwardCache empty;
  CHECK_THROWS_AS(backward(m, Matrix::Ones(2, 2), empty), UsageError);
}

TEST_CASE("Adam step") {
  Rng rng(12);
  ModelParams m = random_model({3, 2}, Activation::linear, rng);
  const ModelParams before = m;
  OptimizerState st = OptimizerState::for_model(m);
  optimizer_step(m, Gradients::zeros_like(m), st);
  CHECK(m.layers[0].weights == before.layers[0].weights);
  CHECK(m.layers[0].biases == before.layers[0].biases);

  // Hand-computed single step from known accumulators.
  ModelParams p;
  p.layers.emplace_back(1, 1, Activation::linear);
  p.layers[0].weights(0, 0) = 0.5;
  p.layers[0].biases(0) = -0.2;
  AdamConfig cfg;
  cfg.learning_rate = 0.01;
  OptimizerState s = OptimizerState::for_model(p, cfg);
  s.step = 2;
  s.m_weights[0](0, 0) = 0.1;
  s.v_weights[0](0, 0) = 0.04;
  Gradients g = Gradients::zeros_like(p);
  g.weights[0](0, 0) = 0.3;
  optimizer_step(p, g, s);
  const double m3 = 0.9 * 0.1 + 0.1 * 0.3;
  const double v3 = 0.999 * 0.04 + 0.001 * 0.09;
  const double mh = m3 / (1 - std::pow(0.9, 3));
  const double vh = v3 / (1 - std::pow(0.999, 3));
  CHECK(std::abs(p.layers[0].weights(0, 0) - (0.5 - 0.01 * mh / (std::sqrt(vh) + 1e-8))) <= 1e-12);
  CHECK(s.step == 3);

  // Determinism.
  auto run = [] {
    Rng r(77);
    ModelParams q = random_model({4, 3, 2}, Activation::tanh, r);
    OptimizerState os = OptimizerState::for_model(q);
    for (int i = 0; i < 10; ++i) {
      ForwardCache c;
      forward(q, random_matrix(4, 5, r), &c);
      optimizer_step(q, backward(q, random_matrix(2, 5, r), c).grads, os);
    }
    return q;
  };
  const auto a = run();
  const auto b = run();
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    CHECK(a.layers[i].weights == b.layers[i].weights);
    CHECK(a.layers[i].biases == b.layers[i].biases);
  }

  Gradients wrong = Gradients::zeros_like(m);
  wrong.weights[0] = Matrix::Zero(5, 5);
  CHECK_THROWS_AS(optimizer_step(m, wrong, st), ArgumentError);
}

TEST_CASE("parameter and flop counts") {
  Rng rng(0);
  const int w[] = {256, 128, 32};
  const auto m = make_mlp(w, Activation::leaky_relu, Activation::linear, rng);
  CHECK(count_params(m) == 37024);
  CHECK(count_flops(m) == 2 * (256 * 128 + 128 * 32) + 128 + 32);
  CHECK(count_params(ModelParams{}) == 0);
  ModelParams four;
  four.layers.emplace_back(4, 4, Activation::linear);
  CHECK(count_params(four) == 20);
}

TEST_CASE("model validation and activation names") {
  ModelParams bad;
  bad.layers.emplace_back(3, 4, Activation::linear);
  bad.layers.emplace_back(5, 2, Activation::linear);
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  CHECK(parse_activation(to_string(Activation::tanh)) == Activation::tanh);
  CHECK_THROWS(parse_activation("relu6"));
}
