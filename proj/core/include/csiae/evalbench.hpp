#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "csiae/models.hpp"
#include "csiae/pipeline.hpp"
#include "csiae/tensor.hpp"

namespace csiae {

/// ||h - h_hat||^2 / ||h||^2. Throws ArgumentError on length mismatch or a
/// zero reference.
double nmse(std::span<const double> h, std::span<const double> h_hat);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }

struct NmseResult {
  Approach approach = Approach::masked;
  int lambda = 0;
  double nmse_linear = 0.0;
  double nmse_db = 0.0;
  std::int64_t sample_count = 0;
  double std_error = 0.0;  // standard error of nmse_linear
};

/// Mean, dB and standard error of per-sample NMSE values.
NmseResult summarize(Approach approach, int lambda, std::span<const double> per_sample);

/// Per-sample NMSE of encode -> decode -> denormalize against the
/// denormalized input. Samples must belong to the bundle's category.
std::vector<double> per_sample_nmse(const AeBundle& bundle, std::span<const DelaySample> samples,
                                    int lambda);

/// One NmseResult per lambda in `ls`, measured in the delay domain.
std::vector<NmseResult> evaluate(const AeBundle& bundle, std::span<const DelaySample> samples,
                                 const LambdaSet& ls);

/// Full pipeline Ĥ for one tensor at `lambda`: partition, IFFT, normalize,
/// encode/decode, denormalize, FFT, crop, concat.
CsiTensor reconstruct_tensor(const AeBundle& bundle, const CsiTensor& h, int lambda);

/// Full-tensor NMSE per lambda, averaged over tensors.
std::vector<NmseResult> evaluate_tensors(const AeBundle& bundle, std::span<const CsiTensor> tensors,
                                         const LambdaSet& ls);

enum class Precision { f32, f64 };

struct BenchOptions {
  int repeats = 10000;
  int warmup = 10;
  // Shape of the tensor compressed per timed run; one encoder forward per antenna pair.
  int k = 128;
  int n_bs = 32;
  int n_ue = 4;
  Precision precision = Precision::f32;
  std::uint64_t seed = 1;
};

struct BenchResult {
  Approach approach = Approach::masked;
  int cardinality = 0;
  std::vector<int> lambdas;
  std::vector<double> per_cr_latency_s;  // mean over repeats
  std::vector<std::int64_t> per_cr_flops;  // per encoder forward
  double worst_cr_latency_s = 0.0;
  std::int64_t worst_cr_flops = 0;
  int repeats = 0;
  std::int64_t param_count = 0;  // encoder side
};

/// Times the compression of one tensor (n_bs * n_ue sequential encoder
/// forwards) for every latent size, single-threaded, warmup excluded.
BenchResult bench_latency(const AeBundle& bundle, const BenchOptions& opt);

/// Flop and parameter accounting only (no timing).
BenchResult count_only(const AeBundle& bundle);

struct ScalingRow {
  Approach approach = Approach::masked;
  int cardinality = 0;
  std::int64_t params = 0;
  double latency_s = 0.0;  // 0 when timing was skipped
  std::int64_t flops = 0;  // worst-CR encoder flops
};

/// Parameter count, worst-CR flops and (when opt is given) worst-CR latency
/// for each approach and lambda set. Bundles are built untrained.
std::vector<ScalingRow> scaling_experiment(std::span<const Approach> approaches,
                                           std::span<const LambdaSet> lambda_sets,
                                           const InputCategory& cat,
                                           const BenchOptions* opt = nullptr);

struct PartitionExperimentConfig {
  int parts = 4;
  int compression_divisor = 64;  // latent = part size / divisor
  int epochs = 20;
  int batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
};

struct PartitionResult {
  PartitionDim dim = PartitionDim::frequency;
  int parts = 0;
  int input_size = 0;
  int latent_size = 0;
  double nmse_linear = 0.0;
  double nmse_db = 0.0;
  std::int64_t test_tensors = 0;
};

/// Elements per part when `h` is split `parts` ways along `dim`.
int partition_input_size(const CsiTensor& h, PartitionDim dim, int parts);

/// For each dim, trains one shared linear AE on every part of the training
/// tensors and reports full-tensor NMSE of the concatenated reconstruction
/// on the test tensors.
std::vector<PartitionResult> partition_dim_experiment(std::span<const CsiTensor> train,
                                                      std::span<const CsiTensor> test,
                                                      std::span<const PartitionDim> dims,
                                                      const PartitionExperimentConfig& cfg);

/// approach,lambda,cr,nmse_linear,nmse_db,n ; cr is per antenna slice for input size k.
void write_nmse_csv(std::ostream& out, std::span<const NmseResult> rows, int k);
/// approach,cardinality,params,latency_s,flops
void write_scaling_csv(std::ostream& out, std::span<const ScalingRow> rows);

}  // namespace csiae
