#include "csiae/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "csiae/errors.hpp"

namespace csiae {

namespace {

enum Stream : std::uint64_t { kShuffleStream = 1000 };

struct ReconGrad {
  Matrix grad;
  double loss = 0.0;
};

// Mean squared reconstruction error over the batch and its gradient, scaled by `weight`.
ReconGrad reconstruction_grad(const Matrix& y, const Matrix& x, double weight) {
  const double b = static_cast<double>(x.cols());
  Matrix r = y - x;
  ReconGrad out;
  out.loss = r.squaredNorm() / b;
  out.grad = (2.0 * weight / b) * r;
  return out;
}

Matrix gather(const Matrix& data, std::span<const int> cols) {
  Matrix x(data.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = data.col(cols[i]);
  return x;
}

Matrix pad_rows(const Matrix& z, int rows) {
  if (z.rows() == rows) return z;
  Matrix out = Matrix::Zero(rows, z.cols());
  out.topRows(z.rows()) = z;
  return out;
}

void check_lambdas(const AeBundle& bundle, const LambdaSet& ls) {
  ls.validate();
  if (ls.lambdas != bundle.lambda_set.lambdas) {
    throw UsageError("training lambda set does not match the bundle's latent sizes");
  }
}

class Trainer {
 public:
  Trainer(AeBundle& bundle, const Matrix& data, const TrainConfig& cfg, const StepObserver& obs)
      : bundle_(bundle), data_(data), cfg_(cfg), observer_(obs) {
    const int probe = std::min<int>(cfg.probe_size, static_cast<int>(data.cols()));
    probe_ = data.leftCols(std::max(probe, 1));
  }

  HistoryEntry snapshot(int epoch, std::string phase, int target) const {
    return {epoch, std::move(phase), target, total_loss(bundle_, probe_, cfg_.lambda_set)};
  }

  History run_joint() {
    reset_states();
    History h;
    h.push_back(snapshot(0, "init", 0));
    for (int e = 1; e <= cfg_.epochs_joint; ++e) {
      for_each_batch(e, [&](const Matrix& x) {
        joint_step(x);
        notify("joint", e, 0);
      });
      h.push_back(snapshot(e, "joint", 0));
    }
    return h;
  }

  History run_fine_tune(int first_epoch) {
    History h;
    auto& enc = bundle_.universal_block();
    const auto& ls = bundle_.lambda_set;
    int epoch = first_epoch;
    int prev = 0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const int target = ls.lambdas[i];
      enc.freeze_all();
      enc.layers.back().set_trainable_rows(prev, target);
      for (auto& d : bundle_.decoders) d.freeze_all();
      bundle_.decoders[i].unfreeze_all();
      reset_states();
      for (int e = 0; e < cfg_.epochs_per_substep; ++e) {
        ++epoch;
        for_each_batch(epoch, [&](const Matrix& x) {
          fine_tune_step(x, i);
          notify("finetune", epoch, target);
        });
        h.push_back(snapshot(epoch, "finetune", target));
      }
      prev = target;
    }
    enc.unfreeze_all();
    for (auto& d : bundle_.decoders) d.unfreeze_all();
    return h;
  }

 private:
  void reset_states() {
    AdamConfig ac;
    ac.learning_rate = cfg_.learning_rate;
    enc_states_.clear();
    fcb_states_.clear();
    dec_states_.clear();
    for (const auto& m : bundle_.encoders) enc_states_.push_back(OptimizerState::for_model(m, ac));
    for (const auto& m : bundle_.fcb_chain) fcb_states_.push_back(OptimizerState::for_model(m, ac));
    for (const auto& m : bundle_.decoders) dec_states_.push_back(OptimizerState::for_model(m, ac));
  }

  template <class Fn>
  void for_each_batch(int epoch, Fn&& fn) {
    const int n = static_cast<int>(data_.cols());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(cfg_.seed, kShuffleStream + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += cfg_.batch_size) {
      const int len = std::min(cfg_.batch_size, n - start);
      batch_start_ = start;
      fn(gather(data_, std::span<const int>(order).subspan(start, len)));
    }
  }

  void notify(std::string_view phase, int epoch, int target) {
    ++step_;
    if (observer_) observer_(StepEvent{phase, epoch, target, step_, bundle_});
  }

  void check(double loss, int lambda) const {
    if (!std::isfinite(loss)) {
      throw TrainingError("loss diverged (non-finite) at step " + std::to_string(step_ + 1) +
                          ", batch offset " + std::to_string(batch_start_) + ", lambda " +
                          std::to_string(lambda) + "; try a smaller learning rate");
    }
  }

  // Decoder i on latent z (already masked / padded). Returns dLoss/dz.
  Matrix decoder_pass(std::size_t i, const Matrix& z, const Matrix& x, double weight,
                      Gradients& grads) {
    ForwardCache cache;
    const Matrix y = forward(bundle_.decoders[i], z, &cache);
    ReconGrad rg = reconstruction_grad(y, x, weight);
    check(rg.loss, bundle_.lambda_set.lambdas[i]);
    BackwardResult br = backward(bundle_.decoders[i], rg.grad, cache);
    grads = std::move(br.grads);
    return std::move(br.input_grad);
  }

  void joint_step(const Matrix& x) {
    const auto& ls = bundle_.lambda_set;
    const auto& w = cfg_.lambda_set.weights;
    const std::size_t n = ls.size();
    std::vector<Gradients> dec_grads(n);

    switch (bundle_.approach) {
      case Approach::masked: {
        auto& enc = bundle_.encoders[0];
        ForwardCache ce;
        const Matrix z = forward(enc, x, &ce);
        Matrix dz = Matrix::Zero(z.rows(), z.cols());
        for (std::size_t i = 0; i < n; ++i) {
          const MaskVector mask(ls.lambdas[i], ls.lambda_max());
          dz += apply_mask(decoder_pass(i, apply_mask(z, mask), x, w[i], dec_grads[i]), mask);
        }
        const Gradients eg = backward(enc, dz, ce).grads;
        optimizer_step(enc, eg, enc_states_[0]);
        break;
      }
      case Approach::saldr: {
        auto& enc = bundle_.encoders[0];
        ForwardCache ce;
        std::vector<Matrix> latents(n);
        std::vector<ForwardCache> fcb_cache(n > 0 ? n - 1 : 0);
        latents[n - 1] = forward(enc, x, &ce);
        for (std::size_t j = n - 1; j-- > 0;) {
          latents[j] = forward(bundle_.fcb_chain[j], latents[j + 1], &fcb_cache[j]);
        }
        std::vector<Matrix> dlat(n);
        for (std::size_t i = 0; i < n; ++i) {
          const Matrix g = decoder_pass(i, pad_rows(latents[i], ls.lambda_max()), x, w[i], dec_grads[i]);
          dlat[i] = g.topRows(ls.lambdas[i]);
        }
        std::vector<Gradients> fcb_grads(n > 0 ? n - 1 : 0);
        for (std::size_t j = 0; j + 1 < n; ++j) {
          BackwardResult br = backward(bundle_.fcb_chain[j], dlat[j], fcb_cache[j]);
          dlat[j + 1] += br.input_grad;
          fcb_grads[j] = std::move(br.grads);
        }
        const Gradients eg = backward(enc, dlat[n - 1], ce).grads;
        optimizer_step(enc, eg, enc_states_[0]);
        for (std::size_t j = 0; j + 1 < n; ++j) {
          optimizer_step(bundle_.fcb_chain[j], fcb_grads[j], fcb_states_[j]);
        }
        break;
      }
      case Approach::naive: {
        for (std::size_t i = 0; i < n; ++i) {
          auto& enc = bundle_.encoders[i];
          ForwardCache ce;
          const Matrix z = forward(enc, x, &ce);
          const Matrix dz = decoder_pass(i, z, x, 1.0, dec_grads[i]);
          const Gradients eg = backward(enc, dz, ce).grads;
          optimizer_step(enc, eg, enc_states_[i]);
        }
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      optimizer_step(bundle_.decoders[i], dec_grads[i], dec_states_[i]);
    }
  }

  void fine_tune_step(const Matrix& x, std::size_t i) {
    auto& enc = bundle_.encoders[0];
    const auto& ls = bundle_.lambda_set;
    const MaskVector mask(ls.lambdas[i], ls.lambda_max());
    ForwardCache ce;
    const Matrix z = forward(enc, x, &ce);
    Gradients dg;
    const Matrix dz = apply_mask(decoder_pass(i, apply_mask(z, mask), x, 1.0, dg), mask);
    const Gradients eg = backward(enc, dz, ce).grads;
    optimizer_step(enc, eg, enc_states_[0]);
    optimizer_step(bundle_.decoders[i], dg, dec_states_[i]);
  }

  AeBundle& bundle_;
  const Matrix& data_;
  const TrainConfig& cfg_;
  const StepObserver& observer_;
  Matrix probe_;
  std::vector<OptimizerState> enc_states_, fcb_states_, dec_states_;
  std::int64_t step_ = 0;
  int batch_start_ = 0;
};

}  // namespace

void TrainConfig::validate() const {
  if (epochs_joint < 0 || epochs_per_substep < 0) throw ConfigError("epoch counts must be >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (probe_size < 1) throw ConfigError("probe size must be positive");
  lambda_set.validate();
}

double LossReport::at(int lambda) const {
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i] == lambda) return per_lambda[i];
  }
  throw ArgumentError("no loss recorded for latent size " + std::to_string(lambda));
}

Matrix pack_samples(std::span<const DelaySample> samples) {
  if (samples.empty()) return Matrix();
  const auto rows = static_cast<Eigen::Index>(samples.front().data.size());
  Matrix m(rows, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (static_cast<Eigen::Index>(samples[i].data.size()) != rows) {
      throw ArgumentError("pack_samples: samples differ in length");
    }
    m.col(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Vector>(samples[i].data.data(), rows);
  }
  return m;
}

double masked_loss(const AeBundle& bundle, const Matrix& batch, int lambda) {
  if (batch.cols() == 0) throw ArgumentError("masked_loss: empty batch");
  const Matrix y = reconstruct_batch(bundle, batch, lambda);
  return (y - batch).squaredNorm() / static_cast<double>(batch.cols());
}

double masked_loss(const AeBundle& bundle, std::span<const DelaySample> batch, int lambda) {
  if (batch.empty()) throw ArgumentError("masked_loss: empty batch");
  return masked_loss(bundle, pack_samples(batch), lambda);
}

double masked_loss(const ModelParams& encoder, const ModelParams& decoder, const Matrix& batch,
                   int lambda) {
  if (batch.cols() == 0) throw ArgumentError("masked_loss: empty batch");
  const Matrix z = apply_mask(forward(encoder, batch), MaskVector(lambda, encoder.output_size()));
  if (z.rows() > decoder.input_size()) throw ArgumentError("masked_loss: decoder input too small");
  Matrix padded = Matrix::Zero(decoder.input_size(), z.cols());
  padded.topRows(z.rows()) = z;
  const Matrix y = forward(decoder, padded);
  return (y - batch).squaredNorm() / static_cast<double>(batch.cols());
}

LossReport total_loss(const AeBundle& bundle, const Matrix& batch, const LambdaSet& ls) {
  ls.validate();
  LossReport r;
  r.lambdas = ls.lambdas;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const double d = masked_loss(bundle, batch, ls.lambdas[i]);
    r.per_lambda.push_back(d);
    r.total += ls.weights[i] * d;
  }
  return r;
}

LossReport total_loss(const AeBundle& bundle, std::span<const DelaySample> batch,
                      const LambdaSet& ls) {
  if (batch.empty()) throw ArgumentError("total_loss: empty batch");
  return total_loss(bundle, pack_samples(batch), ls);
}

History train_joint(AeBundle& bundle, std::span<const DelaySample> data, const TrainConfig& cfg,
                    const StepObserver& observer) {
  cfg.validate();
  check_lambdas(bundle, cfg.lambda_set);
  if (data.empty()) throw ArgumentError("train_joint: empty dataset");
  bundle.validate();
  const Matrix packed = pack_samples(data);
  if (packed.rows() != bundle.category.input_size()) {
    throw UsageError("train_joint: sample length does not match the bundle's input category");
  }
  Trainer t(bundle, packed, cfg, observer);
  return t.run_joint();
}

History fine_tune(AeBundle& bundle, std::span<const DelaySample> data, const TrainConfig& cfg,
                  const StepObserver& observer, int first_epoch) {
  if (bundle.approach != Approach::masked) {
    throw UsageError("fine_tune applies to masked bundles only");
  }
  cfg.validate();
  check_lambdas(bundle, cfg.lambda_set);
  if (data.empty()) throw ArgumentError("fine_tune: empty dataset");
  const Matrix packed = pack_samples(data);
  if (packed.rows() != bundle.category.input_size()) {
    throw UsageError("fine_tune: sample length does not match the bundle's input category");
  }
  Trainer t(bundle, packed, cfg, observer);
  return t.run_fine_tune(first_epoch);
}

History train(AeBundle& bundle, std::span<const DelaySample> data, const TrainConfig& cfg,
              const StepObserver& observer) {
  History h = train_joint(bundle, data, cfg, observer);
  if (cfg.fine_tune) {
    History ft = fine_tune(bundle, data, cfg, observer, cfg.epochs_joint);
    h.insert(h.end(), ft.begin(), ft.end());
  }
  return h;
}

void write_history_csv(std::ostream& out, const History& history) {
  out << "epoch,phase,target_lambda";
  if (!history.empty()) {
    for (int l : history.front().report.lambdas) out << ",D_" << l;
  }
  out << ",total\n";
  char buf[64];
  for (const auto& e : history) {
    out << e.epoch << ',' << e.phase << ',' << e.target_lambda;
    for (double d : e.report.per_lambda) {
      std::snprintf(buf, sizeof buf, "%.17g", d);
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", e.report.total);
    out << ',' << buf << '\n';
  }
}

}  // namespace csiae
