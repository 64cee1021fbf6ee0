#include "csiae/evalbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "csiae/errors.hpp"
#include "csiae/training.hpp"

namespace csiae {

namespace {

enum Stream : std::uint64_t { kBenchInputStream = 3000, kPartitionInitStream = 3100,
                              kPartitionShuffleStream = 3200 };

void require_category(const AeBundle& bundle, std::span<const DelaySample> samples) {
  for (const auto& s : samples) {
    if (!(s.category == bundle.category)) {
      throw UsageError("sample category " + std::to_string(s.category.index) +
                       " does not match the bundle's category " +
                       std::to_string(bundle.category.index));
    }
  }
}

// Inference-only copy of an encoder path at a chosen precision with
// preallocated activations.
template <class T>
class Runtime {
 public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  void append(const ModelParams& m) {
    for (const auto& l : m.layers) {
      layers_.push_back({l.weights.cast<T>(), l.biases.cast<T>(), l.activation,
                         Vec::Zero(l.out_size())});
    }
  }

  const Vec& run(const Vec& x) {
    const Vec* in = &x;
    for (auto& l : layers_) {
      l.out.noalias() = l.w * *in;
      l.out += l.b;
      if (l.act == Activation::leaky_relu) {
        l.out = l.out.unaryExpr([](T v) { return v > T(0) ? v : T(kLeakySlope) * v; });
      } else if (l.act == Activation::tanh) {
        l.out = l.out.array().tanh().matrix();
      }
      in = &l.out;
    }
    return *in;
  }

 private:
  struct Layer {
    Mat w;
    Vec b;
    Activation act;
    Vec out;
  };
  std::vector<Layer> layers_;
};

template <class T>
Runtime<T> encoder_runtime(const AeBundle& bundle, int lambda) {
  const std::size_t idx = bundle.lambda_set.index_of(lambda);
  Runtime<T> rt;
  switch (bundle.approach) {
    case Approach::masked: rt.append(bundle.encoders[0]); break;
    case Approach::saldr:
      rt.append(bundle.encoders[0]);
      for (std::size_t j = bundle.fcb_chain.size(); j-- > idx;) rt.append(bundle.fcb_chain[j]);
      break;
    case Approach::naive: rt.append(bundle.encoders[idx]); break;
  }
  return rt;
}

template <class T>
std::vector<double> time_per_cr(const AeBundle& bundle, const BenchOptions& opt) {
  using Vec = typename Runtime<T>::Vec;
  const int parts = opt.n_bs * opt.n_ue;
  Rng rng = make_rng(opt.seed, kBenchInputStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> inputs(parts, Vec(bundle.category.input_size()));
  for (auto& v : inputs) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = static_cast<T>(normal(rng));
  }

  // CRs are timed round-robin within each repeat so that clock and cache
  // drift over the run affects every CR alike.
  const bool masked = bundle.approach == Approach::masked;
  const auto& lambdas = bundle.lambda_set.lambdas;
  std::vector<Runtime<T>> runtimes;
  for (int lambda : lambdas) runtimes.push_back(encoder_runtime<T>(bundle, lambda));

  volatile double sink = 0.0;
  auto compress_once = [&](std::size_t i) {
    double acc = 0.0;
    for (const auto& x : inputs) {
      const Vec& z = runtimes[i].run(x);
      // The mask keeps the first lambda entries; transmitting them is a prefix read.
      acc += static_cast<double>(masked ? z.head(lambdas[i]).sum() : z.sum());
    }
    sink = sink + acc;
  };
  for (std::size_t i = 0; i < runtimes.size(); ++i) {
    for (int w = 0; w < opt.warmup; ++w) compress_once(i);
  }
  std::vector<double> out(runtimes.size(), 0.0);
  for (int r = 0; r < opt.repeats; ++r) {
    for (std::size_t i = 0; i < runtimes.size(); ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      compress_once(i);
      const auto t1 = std::chrono::steady_clock::now();
      out[i] += std::chrono::duration<double>(t1 - t0).count();
    }
  }
  for (double& v : out) v /= opt.repeats;
  return out;
}

// Flattened block as a column vector (row-major tensor order).
Matrix blocks_to_columns(std::span<const CsiTensor> tensors, PartitionDim dim, int parts,
                         std::vector<double>* scales) {
  std::vector<Vector> cols;
  for (const auto& t : tensors) {
    for (auto& b : partition_along(t, dim, parts)) {
      Vector v = Eigen::Map<const Vector>(b.data.data(), static_cast<Eigen::Index>(b.data.size()));
      const double rms = std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
      const double s = rms > 0.0 ? rms : 1.0;
      v /= s;
      if (scales) scales->push_back(s);
      cols.push_back(std::move(v));
    }
  }
  if (cols.empty()) return Matrix();
  Matrix m(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
  return m;
}

}  // namespace

double nmse(std::span<const double> h, std::span<const double> h_hat) {
  if (h.size() != h_hat.size()) throw ArgumentError("nmse: length mismatch");
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double d = h[i] - h_hat[i];
    err += d * d;
    ref += h[i] * h[i];
  }
  if (ref == 0.0) throw ArgumentError("nmse: reference has zero energy");
  return err / ref;
}

NmseResult summarize(Approach approach, int lambda, std::span<const double> per_sample) {
  NmseResult r;
  r.approach = approach;
  r.lambda = lambda;
  r.sample_count = static_cast<std::int64_t>(per_sample.size());
  if (per_sample.empty()) return r;
  const double n = static_cast<double>(per_sample.size());
  r.nmse_linear = std::accumulate(per_sample.begin(), per_sample.end(), 0.0) / n;
  r.nmse_db = to_db(r.nmse_linear);
  if (per_sample.size() > 1) {
    double ss = 0.0;
    for (double v : per_sample) ss += (v - r.nmse_linear) * (v - r.nmse_linear);
    r.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

std::vector<double> per_sample_nmse(const AeBundle& bundle, std::span<const DelaySample> samples,
                                    int lambda) {
  require_category(bundle, samples);
  std::vector<double> out;
  out.reserve(samples.size());
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < samples.size(); start += kChunk) {
    const auto chunk = samples.subspan(start, std::min(kChunk, samples.size() - start));
    const Matrix x = pack_samples(chunk);
    const Matrix y = reconstruct_batch(bundle, x, lambda);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const Vector h = x.col(static_cast<Eigen::Index>(i)) * chunk[i].scale;
      const Vector h_hat = y.col(static_cast<Eigen::Index>(i)) * chunk[i].scale;
      out.push_back(nmse(std::span<const double>(h.data(), h.size()),
                         std::span<const double>(h_hat.data(), h_hat.size())));
    }
  }
  return out;
}

std::vector<NmseResult> evaluate(const AeBundle& bundle, std::span<const DelaySample> samples,
                                 const LambdaSet& ls) {
  std::vector<NmseResult> out;
  for (int lambda : ls.lambdas) {
    const auto v = per_sample_nmse(bundle, samples, lambda);
    out.push_back(summarize(bundle.approach, lambda, v));
  }
  return out;
}

CsiTensor reconstruct_tensor(const AeBundle& bundle, const CsiTensor& h, int lambda) {
  auto samples = to_delay_samples(h, 0, true);
  require_category(bundle, samples);
  const Matrix y = reconstruct_batch(bundle, pack_samples(samples), lambda);
  std::vector<AntennaSlice> slices;
  slices.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto c = y.col(static_cast<Eigen::Index>(i));
    samples[i].data.assign(c.data(), c.data() + c.size());
    slices.push_back(from_delay(samples[i], h.k));
  }
  return reconstruct_concat(slices, h.n_bs, h.n_ue, h.subcarrier_spacing_hz);
}

std::vector<NmseResult> evaluate_tensors(const AeBundle& bundle, std::span<const CsiTensor> tensors,
                                         const LambdaSet& ls) {
  std::vector<NmseResult> out;
  for (int lambda : ls.lambdas) {
    std::vector<double> v;
    for (const auto& t : tensors) v.push_back(nmse(t.data, reconstruct_tensor(bundle, t, lambda).data));
    out.push_back(summarize(bundle.approach, lambda, v));
  }
  return out;
}

BenchResult count_only(const AeBundle& bundle) {
  BenchResult r;
  r.approach = bundle.approach;
  r.cardinality = static_cast<int>(bundle.lambda_set.size());
  r.lambdas = bundle.lambda_set.lambdas;
  r.param_count = bundle.encoder_param_count();
  for (int lambda : r.lambdas) r.per_cr_flops.push_back(encode_flops(bundle, lambda));
  r.worst_cr_flops = *std::max_element(r.per_cr_flops.begin(), r.per_cr_flops.end());
  return r;
}

BenchResult bench_latency(const AeBundle& bundle, const BenchOptions& opt) {
  if (opt.repeats < 1) throw ArgumentError("bench_latency: repeats must be >= 1");
  if (opt.warmup < 0 || opt.n_bs < 1 || opt.n_ue < 1) throw ArgumentError("bench_latency: bad options");
  BenchResult r = count_only(bundle);
  r.repeats = opt.repeats;
  r.per_cr_latency_s = opt.precision == Precision::f32 ? time_per_cr<float>(bundle, opt)
                                                       : time_per_cr<double>(bundle, opt);
  r.worst_cr_latency_s = *std::max_element(r.per_cr_latency_s.begin(), r.per_cr_latency_s.end());
  return r;
}

std::vector<ScalingRow> scaling_experiment(std::span<const Approach> approaches,
                                           std::span<const LambdaSet> lambda_sets,
                                           const InputCategory& cat, const BenchOptions* opt) {
  std::vector<ScalingRow> rows;
  for (Approach a : approaches) {
    for (const auto& ls : lambda_sets) {
      const AeBundle b = build_bundle(a, cat, ls);
      const BenchResult r = opt ? bench_latency(b, *opt) : count_only(b);
      rows.push_back({a, r.cardinality, r.param_count, r.worst_cr_latency_s, r.worst_cr_flops});
    }
  }
  return rows;
}

int partition_input_size(const CsiTensor& h, PartitionDim dim, int parts) {
  const int size = dim == PartitionDim::frequency    ? h.k
                   : dim == PartitionDim::bs_antenna ? h.n_bs
                                                     : h.n_ue;
  if (parts < 1 || size % parts != 0) throw ArgumentError("dimension is not divisible into parts");
  return static_cast<int>(h.size()) / parts;
}

std::vector<PartitionResult> partition_dim_experiment(std::span<const CsiTensor> train,
                                                      std::span<const CsiTensor> test,
                                                      std::span<const PartitionDim> dims,
                                                      const PartitionExperimentConfig& cfg) {
  if (train.empty() || test.empty()) throw ArgumentError("partition experiment needs data");
  if (cfg.epochs < 0 || cfg.batch_size < 1 || cfg.compression_divisor < 1) {
    throw ConfigError("invalid partition experiment configuration");
  }
  std::vector<PartitionResult> out;
  for (PartitionDim dim : dims) {
    const Matrix data = blocks_to_columns(train, dim, cfg.parts, nullptr);
    const int in = static_cast<int>(data.rows());
    const int latent = std::max(1, in / cfg.compression_divisor);

    // Same seed for every dim so identical inputs give identical results.
    Rng init = make_rng(cfg.seed, kPartitionInitStream);
    const int enc_w[] = {in, latent};
    const int dec_w[] = {latent, in};
    ModelParams enc = make_mlp(enc_w, Activation::linear, Activation::linear, init);
    ModelParams dec = make_mlp(dec_w, Activation::linear, Activation::linear, init);
    AdamConfig ac;
    ac.learning_rate = cfg.learning_rate;
    OptimizerState se = OptimizerState::for_model(enc, ac);
    OptimizerState sd = OptimizerState::for_model(dec, ac);

    const int n = static_cast<int>(data.cols());
    std::vector<int> order(n);
    for (int e = 1; e <= cfg.epochs; ++e) {
      std::iota(order.begin(), order.end(), 0);
      Rng rng = make_rng(cfg.seed, kPartitionShuffleStream + static_cast<std::uint64_t>(e));
      std::shuffle(order.begin(), order.end(), rng);
      for (int start = 0; start < n; start += cfg.batch_size) {
        const int len = std::min(cfg.batch_size, n - start);
        Matrix x(in, len);
        for (int i = 0; i < len; ++i) x.col(i) = data.col(order[start + i]);
        ForwardCache ce, cd;
        const Matrix z = forward(enc, x, &ce);
        const Matrix y = forward(dec, z, &cd);
        const Matrix g = (2.0 / len) * (y - x);
        if (!g.allFinite()) throw TrainingError("partition experiment diverged");
        BackwardResult bd = backward(dec, g, cd);
        BackwardResult be = backward(enc, bd.input_grad, ce);
        optimizer_step(dec, bd.grads, sd);
        optimizer_step(enc, be.grads, se);
      }
    }

    std::vector<double> per_tensor;
    for (const auto& t : test) {
      std::vector<double> scales;
      const Matrix x = blocks_to_columns(std::span<const CsiTensor>(&t, 1), dim, cfg.parts, &scales);
      const Matrix y = forward(dec, forward(enc, x));
      auto blocks = partition_along(t, dim, cfg.parts);
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto c = y.col(static_cast<Eigen::Index>(i));
        for (Eigen::Index j = 0; j < c.size(); ++j) blocks[i].data[j] = c(j) * scales[i];
      }
      per_tensor.push_back(nmse(t.data, concat_along(blocks, dim).data));
    }
    const NmseResult s = summarize(Approach::masked, latent, per_tensor);
    out.push_back({dim, cfg.parts, in, latent, s.nmse_linear, s.nmse_db, s.sample_count});
  }
  return out;
}

void write_nmse_csv(std::ostream& out, std::span<const NmseResult> rows, int k) {
  out << "approach,lambda,cr,nmse_linear,nmse_db,n\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g,%lld\n",
                  std::string(to_string(r.approach)).c_str(), r.lambda,
                  compression_ratio(r.lambda, k).value(), r.nmse_linear, r.nmse_db,
                  static_cast<long long>(r.sample_count));
    out << buf;
  }
}

void write_scaling_csv(std::ostream& out, std::span<const ScalingRow> rows) {
  out << "approach,cardinality,params,latency_s,flops\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%lld,%.9g,%lld\n",
                  std::string(to_string(r.approach)).c_str(), r.cardinality,
                  static_cast<long long>(r.params), r.latency_s, static_cast<long long>(r.flops));
    out << buf;
  }
}

}  // namespace csiae
