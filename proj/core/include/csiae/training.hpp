#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "csiae/models.hpp"

namespace csiae {

struct TrainConfig {
  int epochs_joint = 100;
  int epochs_per_substep = 50;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  LambdaSet lambda_set;  // must list the bundle's latent sizes; supplies w_lambda
  bool fine_tune = false;
  // History entries evaluate the loss on the first `probe_size` samples.
  int probe_size = 512;

  void validate() const;
};

/// D(lambda) for each lambda and the weighted total.
struct LossReport {
  std::vector<int> lambdas;
  std::vector<double> per_lambda;
  double total = 0.0;

  double at(int lambda) const;
};

struct HistoryEntry {
  int epoch = 0;
  std::string phase;      // "init", "joint" or "finetune"
  int target_lambda = 0;  // fine-tune target, 0 otherwise
  LossReport report;
};

using History = std::vector<HistoryEntry>;

/// Passed to a StepObserver after every optimizer step.
struct StepEvent {
  std::string_view phase;
  int epoch = 0;
  int target_lambda = 0;
  std::int64_t step = 0;
  const AeBundle& bundle;
};

using StepObserver = std::function<void(const StepEvent&)>;

/// Samples as matrix columns.
Matrix pack_samples(std::span<const DelaySample> samples);

/// Batch mean of ||h - g_lambda(f(h) (.) e_lambda)||^2 (or the approach's
/// own encoder path for saldr/naive). Throws ArgumentError on an empty batch.
double masked_loss(const AeBundle& bundle, const Matrix& batch, int lambda);
double masked_loss(const AeBundle& bundle, std::span<const DelaySample> batch, int lambda);

/// Eq-level form on a bare encoder/decoder pair: lambda may be any value in
/// [0, encoder output size]; the masked latent is zero-padded to the decoder input.
double masked_loss(const ModelParams& encoder, const ModelParams& decoder, const Matrix& batch,
                   int lambda);

LossReport total_loss(const AeBundle& bundle, const Matrix& batch, const LambdaSet& ls);
LossReport total_loss(const AeBundle& bundle, std::span<const DelaySample> batch,
                      const LambdaSet& ls);

/// Mini-batch Adam on the weighted total loss. masked/saldr update the shared
/// encoder and all decoders jointly; naive trains each pair on its own D(lambda)
/// over the same batches. Throws TrainingError when the loss diverges.
History train_joint(AeBundle& bundle, std::span<const DelaySample> data, const TrainConfig& cfg,
                    const StepObserver& observer = {});

/// Second training step for masked bundles: |Lambda| sub-steps in ascending
/// lambda; sub-step i trains only universal-block last-layer rows
/// [lambda_{i-1}, lambda_i) and decoder i on D(lambda_i).
History fine_tune(AeBundle& bundle, std::span<const DelaySample> data, const TrainConfig& cfg,
                  const StepObserver& observer = {}, int first_epoch = 0);

/// train_joint, then fine_tune when cfg.fine_tune is set. One combined history.
History train(AeBundle& bundle, std::span<const DelaySample> data, const TrainConfig& cfg,
              const StepObserver& observer = {});

/// Columns: epoch, phase, target_lambda, D_<lambda>..., total.
void write_history_csv(std::ostream& out, const History& history);

}  // namespace csiae
