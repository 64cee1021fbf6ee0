#include <random>

#include <benchmark/benchmark.h>

#include "csiae/csiae.hpp"

namespace {

using namespace csiae;

const InputCategory kCat4 = category_by_index(4);

LambdaSet lambdas_for(int cardinality) {
  return cardinality == 4 ? LambdaSet::uniform({4, 8, 16, 32}) : LambdaSet::range(1, 32);
}

Matrix inputs(int cols) {
  Rng rng(3);
  std::normal_distribution<double> d;
  Matrix x(kCat4.input_size(), cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = d(rng);
  return x;
}

// Smallest latent = worst case for the serial chain.
void BM_Encode(benchmark::State& state, Approach approach) {
  const auto ls = lambdas_for(static_cast<int>(state.range(0)));
  const AeBundle b = build_bundle(approach, kCat4, ls);
  const Vector x = inputs(1).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(encode(b, x, ls.lambda_min()));
  state.counters["flops"] = static_cast<double>(encode_flops(b, ls.lambda_min()));
}
BENCHMARK_CAPTURE(BM_Encode, masked, Approach::masked)->Arg(4)->Arg(32);
BENCHMARK_CAPTURE(BM_Encode, saldr, Approach::saldr)->Arg(4)->Arg(32);
BENCHMARK_CAPTURE(BM_Encode, naive, Approach::naive)->Arg(4)->Arg(32);

// One full tensor (32 x 4 antenna pairs) through the float32 timing path.
void BM_CompressTensor(benchmark::State& state) {
  const AeBundle b = build_masked(kCat4, LambdaSet::uniform({4, 8, 16, 32}));
  BenchOptions opt;
  opt.repeats = 1;
  opt.warmup = 0;
  for (auto _ : state) benchmark::DoNotOptimize(bench_latency(b, opt).worst_cr_latency_s);
}
BENCHMARK(BM_CompressTensor)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const auto ls = LambdaSet::uniform({4, 8, 16, 32});
  AeBundle b = build_masked(kCat4, ls);
  const Matrix x = inputs(static_cast<int>(state.range(0)));
  std::vector<DelaySample> samples(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    samples[i].data.assign(x.col(i).data(), x.col(i).data() + x.rows());
    samples[i].category = kCat4;
  }
  TrainConfig cfg;
  cfg.lambda_set = ls;
  cfg.epochs_joint = 1;
  cfg.batch_size = static_cast<int>(x.cols());
  cfg.probe_size = 1;
  for (auto _ : state) train_joint(b, samples, cfg);
}
BENCHMARK(BM_TrainStep)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ToDelay(benchmark::State& state) {
  GenSetting s;
  s.profile = profile_by_name("EVA");
  s.k = 128;
  s.samples = 1;
  const CsiTensor h = generate_csi(s).front();
  for (auto _ : state) benchmark::DoNotOptimize(to_delay_samples(h, 0));
}
BENCHMARK(BM_ToDelay)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
