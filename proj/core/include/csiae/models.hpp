#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "csiae/neural.hpp"
#include "csiae/pipeline.hpp"

namespace csiae {

/// Supported latent sizes with their loss weights (summing to one).
struct LambdaSet {
  std::vector<int> lambdas;  // strictly increasing, positive
  std::vector<double> weights;  // non-negative, sum to 1

  static LambdaSet uniform(std::vector<int> lambdas);
  static LambdaSet weighted(std::vector<int> lambdas, std::vector<double> weights);
  /// {lo, lo+1, ..., hi}, uniform weights.
  static LambdaSet range(int lo, int hi);
  /// c evenly spaced sizes round(lambda_max * i / c), i = 1..c.
  static LambdaSet with_cardinality(int c, int lambda_max);

  void validate() const;
  int lambda_max() const { return lambdas.back(); }
  int lambda_min() const { return lambdas.front(); }
  std::size_t size() const { return lambdas.size(); }
  bool contains(int lambda) const;
  /// Position of `lambda`; throws ArgumentError when unsupported.
  std::size_t index_of(int lambda) const;
};

enum class Approach { naive, saldr, masked };

std::string_view to_string(Approach a);
Approach parse_approach(std::string_view name);

/// Encoder(s) and per-lambda decoders for one input category.
///
/// masked: encoders = {universal block}, latent is masked to lambda.
/// saldr:  encoders = {universal block}; fcb_chain[i] maps lambda_{i+1} to
///         lambda_i, so the smallest latent needs |Lambda|-1 extra layers.
/// naive:  encoders[i] is dedicated to lambdas[i].
/// Decoders of masked/saldr bundles take a lambda_max-long input with zeros
/// past lambda; naive decoders take exactly lambda inputs.
struct AeBundle {
  Approach approach = Approach::masked;
  InputCategory category;
  LambdaSet lambda_set;
  std::vector<ModelParams> encoders;
  std::vector<ModelParams> fcb_chain;
  std::vector<ModelParams> decoders;

  void validate() const;

  const ModelParams& universal_block() const;
  ModelParams& universal_block();
  const ModelParams& decoder_for(int lambda) const;

  int decoder_input_size(int lambda) const;

  /// UE-side parameters: encoders plus the FCB chain.
  std::int64_t encoder_param_count() const;
  std::int64_t decoder_param_count() const;
};

struct BuildOptions {
  std::uint64_t seed = 1;
  // Hidden widths of the universal block / decoders. Empty means {ifft_size}.
  std::vector<int> universal_hidden;
  Activation hidden_activation = Activation::leaky_relu;
};

AeBundle build_masked(const InputCategory& cat, const LambdaSet& ls, const BuildOptions& opt = {});
AeBundle build_saldr(const InputCategory& cat, const LambdaSet& ls, const BuildOptions& opt = {});
AeBundle build_naive(const InputCategory& cat, const LambdaSet& ls, const BuildOptions& opt = {});
AeBundle build_bundle(Approach approach, const InputCategory& cat, const LambdaSet& ls,
                      const BuildOptions& opt = {});

/// input_size -> ifft_size -> 2*ifft_size, linear output.
ModelParams build_decoder(const InputCategory& cat, int input_size, Rng& rng,
                          Activation hidden = Activation::leaky_relu);

/// Latent for a column batch: lambda_max rows (masked, zeros past lambda)
/// or lambda rows (saldr, naive).
Matrix encode_batch(const AeBundle& bundle, const Matrix& x, int lambda);
Vector encode(const AeBundle& bundle, const Vector& x, int lambda);

Matrix decode_batch(const AeBundle& bundle, const Matrix& latent, int lambda);
Vector decode(const AeBundle& bundle, const Vector& latent, int lambda);

inline Matrix reconstruct_batch(const AeBundle& bundle, const Matrix& x, int lambda) {
  return decode_batch(bundle, encode_batch(bundle, x, lambda), lambda);
}

/// Number of FCB layers applied to produce `lambda` (saldr only, else 0).
int chain_applications(const AeBundle& bundle, int lambda);

/// Encoder-side flops for one input at `lambda`. The mask is a truncation and
/// costs nothing.
std::int64_t encode_flops(const AeBundle& bundle, int lambda);

struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// lambda / (2 K N_BS N_UE) in lowest terms. Per antenna slice use n_bs = n_ue = 1.
Ratio compression_ratio(int lambda, int k, int n_bs = 1, int n_ue = 1);

}  // namespace csiae
