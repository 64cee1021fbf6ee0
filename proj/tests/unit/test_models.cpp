#include <doctest.h>

#include <random>

#include "csiae/errors.hpp"
#include "csiae/models.hpp"

using namespace csiae;

namespace {

const InputCategory kCat4 = category_by_index(4);

// Independent count for a dense chain.
std::int64_t chain_count(std::initializer_list<int> widths) {
  std::int64_t n = 0;
  const int* prev = nullptr;
  for (const int& w : widths) {
    if (prev) n += static_cast<std::int64_t>(*prev) * w + w;
    prev = &w;
  }
  return n;
}

Matrix random_input(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> d;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

}  // namespace

TEST_CASE("LambdaSet construction and validation") {
  const auto u = LambdaSet::uniform({4, 8, 16, 32});
  CHECK(u.lambda_max() == 32);
  CHECK(u.lambda_min() == 4);
  CHECK(u.weights == std::vector<double>(4, 0.25));
  CHECK(u.index_of(16) == 2);
  CHECK_THROWS_AS(u.index_of(5), ArgumentError);
  CHECK(LambdaSet::range(1, 32).size() == 32);
  CHECK(LambdaSet::with_cardinality(4, 32).lambdas == std::vector<int>{8, 16, 24, 32});
  CHECK(LambdaSet::with_cardinality(32, 32).lambdas == LambdaSet::range(1, 32).lambdas);
  CHECK_THROWS_AS(LambdaSet::uniform({8, 4}), ConfigError);
  CHECK_THROWS_AS(LambdaSet::uniform({4, 4}), ConfigError);
  CHECK_THROWS_AS(LambdaSet::uniform({}), ConfigError);
  CHECK_THROWS_AS(LambdaSet::weighted({4, 8}, {0.5, 0.6}), ConfigError);
  CHECK_THROWS_AS(LambdaSet::weighted({4, 8}, {1.5, -0.5}), ConfigError);
  CHECK_NOTHROW(LambdaSet::weighted({4, 8}, {0.3, 0.7}));
}

TEST_CASE("masked architecture and parameter counts") {
  const auto small = build_masked(kCat4, LambdaSet::uniform({4, 8, 16, 32}));
  const auto large = build_masked(kCat4, LambdaSet::range(1, 32));
  CHECK(small.encoder_param_count() == chain_count({256, 128, 32}));
  CHECK(small.encoder_param_count() == 37024);
  CHECK(large.encoder_param_count() == 37024);
  CHECK(small.encoders.size() == 1);
  CHECK(small.decoders.size() == 4);
  for (const auto& d : small.decoders) {
    REQUIRE(d.layers.size() == 2);
    CHECK(d.layers[0].in_size() == 32);
    CHECK(d.layers[0].out_size() == 128);
    CHECK(d.layers[1].out_size() == 256);
    CHECK(d.layers[1].activation == Activation::linear);
  }
  CHECK(small.universal_block().layers[0].activation == Activation::leaky_relu);
  CHECK(small.universal_block().layers[1].activation == Activation::linear);

  // lambda_max equal to the input size gives CR 1 at lambda_max.
  const auto cat1 = category_by_index(1);
  const auto full = build_masked(cat1, LambdaSet::uniform({cat1.input_size()}));
  CHECK(full.universal_block().output_size() == full.universal_block().input_size());
  CHECK_THROWS_AS(build_masked(cat1, LambdaSet::uniform({cat1.input_size() + 1})), ConfigError);
}

TEST_CASE("saldr architecture and parameter counts") {
  const auto a = build_saldr(kCat4, LambdaSet::uniform({4, 8, 16, 32}));
  CHECK(a.fcb_chain.size() == 3);
  CHECK(a.encoder_param_count() - 37024 == chain_count({32, 16}) + chain_count({16, 8}) + chain_count({8, 4}));
  CHECK(a.encoder_param_count() == 37724);

  std::int64_t chain = 0;
  for (int k = 1; k <= 31; ++k) chain += k * k + 2 * k;
  const auto b = build_saldr(kCat4, LambdaSet::range(1, 32));
  CHECK(chain == 11408);
  CHECK(b.encoder_param_count() == 37024 + chain);
  CHECK(b.encoder_param_count() == 48432);

  const auto single = build_saldr(kCat4, LambdaSet::uniform({32}));
  const auto masked = build_masked(kCat4, LambdaSet::uniform({32}));
  CHECK(single.fcb_chain.empty());
  CHECK(single.universal_block().layers[0].weights == masked.universal_block().layers[0].weights);
  CHECK(chain_applications(a, 4) == 3);
  CHECK(chain_applications(a, 32) == 0);
}

TEST_CASE("naive architecture and parameter counts") {
  std::int64_t expected = 0;
  for (int l = 1; l <= 32; ++l) expected += 1029 * l + 4 * l * l;
  const auto big = build_naive(kCat4, LambdaSet::range(1, 32));
  CHECK(big.encoder_param_count() == expected);
  CHECK(big.encoder_param_count() == 589072);
  const auto c1 = build_naive(kCat4, LambdaSet::uniform({4, 8, 16, 32}));
  CHECK(c1.encoder_param_count() == 67180);
  CHECK(c1.encoders[1].layers[0].out_size() == 32);
  const auto one = build_naive(kCat4, LambdaSet::uniform({8}));
  CHECK(one.encoders.size() == 1);
  CHECK(one.decoders.size() == 1);
  CHECK(one.decoders[0].input_size() == 8);
}

TEST_CASE("encode: prefix property, chain lengths and errors") {
  const auto ls = LambdaSet::uniform({4, 8, 16, 32});
  const auto m = build_masked(kCat4, ls);
  const Matrix x = random_input(256, 5, 3);
  const Matrix z32 = encode_batch(m, x, 32);
  CHECK(z32 == forward(m.universal_block(), x));
  for (int l : ls.lambdas) {
    const Matrix z = encode_batch(m, x, l);
    CHECK(z.rows() == 32);
    CHECK(z.topRows(l) == z32.topRows(l));
    CHECK(z.bottomRows(32 - l).isZero(0.0));
  }
  CHECK_THROWS_AS(encode_batch(m, x, 5), ArgumentError);

  const auto s = build_saldr(kCat4, ls);
  CHECK(encode_batch(s, x, 4).rows() == 4);
  Matrix manual = forward(s.universal_block(), x);
  for (int j = 2; j >= 0; --j) manual = forward(s.fcb_chain[j], manual);
  CHECK(encode_batch(s, x, 4) == manual);

  const auto n = build_naive(kCat4, ls);
  CHECK(encode_batch(n, x, 8).rows() == 8);
  CHECK_THROWS_AS(decode_batch(n, Matrix::Zero(9, 1), 8), ArgumentError);
  CHECK_THROWS_AS(n.universal_block(), UsageError);
}

TEST_CASE("decoder of a zero latent is the propagated bias") {
  auto m = build_masked(kCat4, LambdaSet::uniform({8, 32}));
  Rng rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  auto& dec = m.decoders[0];
  for (auto& l : dec.layers)
    for (Eigen::Index i = 0; i < l.biases.size(); ++i) l.biases(i) = u(rng);
  const Vector y = decode(m, Vector::Zero(32), 8);
  Vector h = dec.layers[0].biases.unaryExpr([](double v) { return v > 0 ? v : kLeakySlope * v; });
  const Vector expect = dec.layers[1].weights * h + dec.layers[1].biases;
  CHECK((y - expect).norm() <= 1e-12);
  CHECK(y.size() == 256);
}

TEST_CASE("flop counts") {
  const auto ls4 = LambdaSet::uniform({4, 8, 16, 32});
  const auto ls32 = LambdaSet::range(1, 32);
  const std::int64_t base = 2 * (256 * 128 + 128 * 32) + 128 + 32;
  const auto m4 = build_masked(kCat4, ls4);
  const auto m32 = build_masked(kCat4, ls32);
  for (int l : ls4.lambdas) CHECK(encode_flops(m4, l) == base);
  for (int l : ls32.lambdas) CHECK(encode_flops(m32, l) == base);
  const auto s32 = build_saldr(kCat4, ls32);
  std::int64_t prev = 0;
  for (int l = 32; l >= 1; --l) {
    const auto f = encode_flops(s32, l);
    CHECK(f > prev);
    prev = f;
  }
  const auto s4 = build_saldr(kCat4, ls4);
  CHECK(encode_flops(s4, 4) == base + (2 * 32 * 16 + 16) + (2 * 16 * 8 + 8) + (2 * 8 * 4 + 4));
}

TEST_CASE("compression ratio") {
  CHECK(compression_ratio(32, 128) == Ratio{1, 8});
  CHECK(compression_ratio(4, 128) == Ratio{1, 64});
  CHECK(compression_ratio(2 * 128 * 32 * 4, 128, 32, 4) == Ratio{1, 1});
  CHECK(compression_ratio(16, 128).value() == doctest::Approx(1.0 / 16));
  CHECK_THROWS_AS(compression_ratio(0, 128), ArgumentError);
}

TEST_CASE("bundle validation and approach names") {
  auto m = build_masked(kCat4, LambdaSet::uniform({4, 8}));
  CHECK_NOTHROW(m.validate());
  m.decoders.pop_back();
  CHECK_THROWS_AS(m.validate(), ConfigError);
  for (auto a : {Approach::naive, Approach::saldr, Approach::masked}) CHECK(parse_approach(to_string(a)) == a);
  CHECK_THROWS_AS(parse_approach("vae"), ConfigError);
  const auto b1 = build_bundle(Approach::saldr, kCat4, LambdaSet::uniform({4, 8}), {.seed = 3});
  const auto b2 = build_bundle(Approach::saldr, kCat4, LambdaSet::uniform({4, 8}), {.seed = 3});
  CHECK(b1.fcb_chain[0].layers[0].weights == b2.fcb_chain[0].layers[0].weights);
}
