#include "csiae/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "csiae/errors.hpp"

namespace csiae {

namespace {

enum Stream : std::uint64_t { kEncoderStream = 10, kFcbStream = 200, kDecoderStream = 400 };

void check_fits(const InputCategory& cat, const LambdaSet& ls) {
  ls.validate();
  if (ls.lambda_max() > cat.input_size()) {
    throw ConfigError("lambda_max " + std::to_string(ls.lambda_max()) +
                      " exceeds the encoder input size " + std::to_string(cat.input_size()));
  }
}

std::vector<int> hidden_widths(const InputCategory& cat, const BuildOptions& opt) {
  return opt.universal_hidden.empty() ? std::vector<int>{cat.ifft_size} : opt.universal_hidden;
}

ModelParams universal_block(const InputCategory& cat, const LambdaSet& ls,
                            const BuildOptions& opt) {
  std::vector<int> widths{cat.input_size()};
  for (int h : hidden_widths(cat, opt)) widths.push_back(h);
  widths.push_back(ls.lambda_max());
  Rng rng = make_rng(opt.seed, kEncoderStream);
  return make_mlp(widths, opt.hidden_activation, Activation::linear, rng);
}

std::vector<ModelParams> decoders(const InputCategory& cat, const LambdaSet& ls,
                                  const BuildOptions& opt, bool padded) {
  std::vector<ModelParams> out;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    Rng rng = make_rng(opt.seed, kDecoderStream + i);
    out.push_back(build_decoder(cat, padded ? ls.lambda_max() : ls.lambdas[i], rng,
                                opt.hidden_activation));
  }
  return out;
}

Matrix pad_rows(const Matrix& z, int rows) {
  if (z.rows() == rows) return z;
  Matrix out = Matrix::Zero(rows, z.cols());
  out.topRows(z.rows()) = z;
  return out;
}

}  // namespace

LambdaSet LambdaSet::uniform(std::vector<int> lambdas) {
  const auto n = lambdas.size();
  LambdaSet ls{std::move(lambdas), std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0)};
  ls.validate();
  return ls;
}

LambdaSet LambdaSet::weighted(std::vector<int> lambdas, std::vector<double> weights) {
  LambdaSet ls{std::move(lambdas), std::move(weights)};
  ls.validate();
  return ls;
}

LambdaSet LambdaSet::range(int lo, int hi) {
  if (lo < 1 || hi < lo) throw ConfigError("invalid lambda range");
  std::vector<int> l(hi - lo + 1);
  std::iota(l.begin(), l.end(), lo);
  return uniform(std::move(l));
}

LambdaSet LambdaSet::with_cardinality(int c, int lambda_max) {
  if (c < 1 || c > lambda_max) throw ConfigError("cardinality must be in [1, lambda_max]");
  std::vector<int> l;
  for (int i = 1; i <= c; ++i) l.push_back((lambda_max * i + c / 2) / c);
  return uniform(std::move(l));
}

void LambdaSet::validate() const {
  if (lambdas.empty()) throw ConfigError("lambda set is empty");
  if (weights.size() != lambdas.size()) throw ConfigError("one weight per lambda is required");
  double sum = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] < 1) throw ConfigError("latent sizes must be positive");
    if (i > 0 && lambdas[i] <= lambdas[i - 1]) {
      throw ConfigError("latent sizes must be strictly increasing");
    }
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw ConfigError("loss weights must be non-negative");
    }
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("loss weights must sum to 1");
}

bool LambdaSet::contains(int lambda) const {
  return std::find(lambdas.begin(), lambdas.end(), lambda) != lambdas.end();
}

std::size_t LambdaSet::index_of(int lambda) const {
  auto it = std::find(lambdas.begin(), lambdas.end(), lambda);
  if (it == lambdas.end()) {
    throw ArgumentError("latent size " + std::to_string(lambda) + " is not in the lambda set");
  }
  return static_cast<std::size_t>(it - lambdas.begin());
}

std::string_view to_string(Approach a) {
  switch (a) {
    case Approach::naive: return "naive";
    case Approach::saldr: return "saldr";
    case Approach::masked: return "masked";
  }
  return "?";
}

Approach parse_approach(std::string_view name) {
  if (name == "naive") return Approach::naive;
  if (name == "saldr") return Approach::saldr;
  if (name == "masked") return Approach::masked;
  throw ConfigError("unknown approach '" + std::string(name) + "'");
}

void AeBundle::validate() const {
  lambda_set.validate();
  const std::size_t n = lambda_set.size();
  if (decoders.size() != n) throw ConfigError("bundle needs one decoder per latent size");
  if (approach == Approach::naive) {
    if (encoders.size() != n) throw ConfigError("naive bundle needs one encoder per latent size");
    if (!fcb_chain.empty()) throw ConfigError("naive bundle has no FCB chain");
    for (std::size_t i = 0; i < n; ++i) {
      if (encoders[i].output_size() != lambda_set.lambdas[i]) {
        throw ConfigError("naive encoder output does not match its latent size");
      }
    }
  } else {
    if (encoders.size() != 1) throw ConfigError("bundle needs exactly one universal encoder");
    if (encoders[0].output_size() != lambda_set.lambda_max()) {
      throw ConfigError("universal block output must equal lambda_max");
    }
    const std::size_t chain = approach == Approach::saldr ? n - 1 : 0;
    if (fcb_chain.size() != chain) throw ConfigError("FCB chain length does not match |Lambda|");
    for (std::size_t i = 0; i < chain; ++i) {
      if (fcb_chain[i].input_size() != lambda_set.lambdas[i + 1] ||
          fcb_chain[i].output_size() != lambda_set.lambdas[i]) {
        throw ConfigError("FCB " + std::to_string(i) + " has the wrong shape");
      }
    }
  }
  for (const auto& e : encoders) {
    e.validate();
    if (e.input_size() != category.input_size()) {
      throw ConfigError("encoder input does not match the input category");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    decoders[i].validate();
    if (decoders[i].input_size() != decoder_input_size(lambda_set.lambdas[i]) ||
        decoders[i].output_size() != category.input_size()) {
      throw ConfigError("decoder " + std::to_string(i) + " has the wrong shape");
    }
  }
}

const ModelParams& AeBundle::universal_block() const {
  if (approach == Approach::naive) throw UsageError("naive bundles have no universal block");
  return encoders.front();
}

ModelParams& AeBundle::universal_block() {
  if (approach == Approach::naive) throw UsageError("naive bundles have no universal block");
  return encoders.front();
}

const ModelParams& AeBundle::decoder_for(int lambda) const {
  return decoders[lambda_set.index_of(lambda)];
}

int AeBundle::decoder_input_size(int lambda) const {
  return approach == Approach::naive ? lambda : lambda_set.lambda_max();
}

std::int64_t AeBundle::encoder_param_count() const {
  std::int64_t n = 0;
  for (const auto& e : encoders) n += count_params(e);
  for (const auto& f : fcb_chain) n += count_params(f);
  return n;
}

std::int64_t AeBundle::decoder_param_count() const {
  std::int64_t n = 0;
  for (const auto& d : decoders) n += count_params(d);
  return n;
}

ModelParams build_decoder(const InputCategory& cat, int input_size, Rng& rng, Activation hidden) {
  if (input_size < 1) throw ConfigError("decoder input size must be positive");
  const int widths[] = {input_size, cat.ifft_size, cat.input_size()};
  return make_mlp(widths, hidden, Activation::linear, rng);
}

AeBundle build_masked(const InputCategory& cat, const LambdaSet& ls, const BuildOptions& opt) {
  check_fits(cat, ls);
  AeBundle b;
  b.approach = Approach::masked;
  b.category = cat;
  b.lambda_set = ls;
  b.encoders.push_back(universal_block(cat, ls, opt));
  b.decoders = decoders(cat, ls, opt, true);
  return b;
}

AeBundle build_saldr(const InputCategory& cat, const LambdaSet& ls, const BuildOptions& opt) {
  check_fits(cat, ls);
  AeBundle b;
  b.approach = Approach::saldr;
  b.category = cat;
  b.lambda_set = ls;
  b.encoders.push_back(universal_block(cat, ls, opt));
  for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
    Rng rng = make_rng(opt.seed, kFcbStream + i);
    const int widths[] = {ls.lambdas[i + 1], ls.lambdas[i]};
    b.fcb_chain.push_back(make_mlp(widths, Activation::linear, Activation::linear, rng));
  }
  b.decoders = decoders(cat, ls, opt, true);
  return b;
}

AeBundle build_naive(const InputCategory& cat, const LambdaSet& ls, const BuildOptions& opt) {
  check_fits(cat, ls);
  AeBundle b;
  b.approach = Approach::naive;
  b.category = cat;
  b.lambda_set = ls;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const int lambda = ls.lambdas[i];
    Rng rng = make_rng(opt.seed, kEncoderStream + 1 + i);
    const int widths[] = {cat.input_size(), 4 * lambda, lambda};
    b.encoders.push_back(make_mlp(widths, opt.hidden_activation, Activation::linear, rng));
  }
  b.decoders = decoders(cat, ls, opt, false);
  return b;
}

AeBundle build_bundle(Approach approach, const InputCategory& cat, const LambdaSet& ls,
                      const BuildOptions& opt) {
  switch (approach) {
    case Approach::naive: return build_naive(cat, ls, opt);
    case Approach::saldr: return build_saldr(cat, ls, opt);
    case Approach::masked: return build_masked(cat, ls, opt);
  }
  throw ConfigError("unknown approach");
}

Matrix encode_batch(const AeBundle& bundle, const Matrix& x, int lambda) {
  const std::size_t idx = bundle.lambda_set.index_of(lambda);
  switch (bundle.approach) {
    case Approach::masked:
      return apply_mask(forward(bundle.encoders[0], x),
                        MaskVector(lambda, bundle.lambda_set.lambda_max()));
    case Approach::saldr: {
      Matrix z = forward(bundle.encoders[0], x);
      for (std::size_t j = bundle.fcb_chain.size(); j-- > idx;) z = forward(bundle.fcb_chain[j], z);
      return z;
    }
    case Approach::naive: return forward(bundle.encoders[idx], x);
  }
  throw UsageError("unknown approach");
}

Vector encode(const AeBundle& bundle, const Vector& x, int lambda) {
  return encode_batch(bundle, Matrix(x), lambda).col(0);
}

Matrix decode_batch(const AeBundle& bundle, const Matrix& latent, int lambda) {
  const auto& dec = bundle.decoder_for(lambda);
  const int expected = bundle.approach == Approach::masked ? bundle.lambda_set.lambda_max() : lambda;
  if (latent.rows() != expected) throw ArgumentError("decode: latent has the wrong length");
  return forward(dec, pad_rows(latent, dec.input_size()));
}

Vector decode(const AeBundle& bundle, const Vector& latent, int lambda) {
  return decode_batch(bundle, Matrix(latent), lambda).col(0);
}

int chain_applications(const AeBundle& bundle, int lambda) {
  const std::size_t idx = bundle.lambda_set.index_of(lambda);
  if (bundle.approach != Approach::saldr) return 0;
  return static_cast<int>(bundle.fcb_chain.size() - idx);
}

std::int64_t encode_flops(const AeBundle& bundle, int lambda) {
  const std::size_t idx = bundle.lambda_set.index_of(lambda);
  switch (bundle.approach) {
    case Approach::masked: return count_flops(bundle.encoders[0]);
    case Approach::saldr: {
      std::int64_t n = count_flops(bundle.encoders[0]);
      for (std::size_t j = idx; j < bundle.fcb_chain.size(); ++j) n += count_flops(bundle.fcb_chain[j]);
      return n;
    }
    case Approach::naive: return count_flops(bundle.encoders[idx]);
  }
  return 0;
}

Ratio compression_ratio(int lambda, int k, int n_bs, int n_ue) {
  if (lambda < 1 || k < 1 || n_bs < 1 || n_ue < 1) {
    throw ArgumentError("compression_ratio: arguments must be positive");
  }
  const std::int64_t num = lambda;
  const std::int64_t den = 2LL * k * n_bs * n_ue;
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

}  // namespace csiae
