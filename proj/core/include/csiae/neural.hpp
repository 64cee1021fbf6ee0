#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "csiae/random.hpp"

namespace csiae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation : std::uint8_t { linear = 0, leaky_relu = 1, tanh = 2 };

inline constexpr double kLeakySlope = 0.01;

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// Fully connected layer y = act(W x + b) with per-output-unit freeze flags.
/// A frozen unit keeps its weight row and bias fixed.
struct DenseLayer {
  Matrix weights;  // out x in
  Vector biases;   // out
  Activation activation = Activation::linear;
  std::vector<std::uint8_t> trainable;  // one flag per output unit

  DenseLayer() = default;
  DenseLayer(int in, int out, Activation act);

  int in_size() const { return static_cast<int>(weights.cols()); }
  int out_size() const { return static_cast<int>(weights.rows()); }

  bool is_trainable(int unit) const { return trainable[unit] != 0; }
  bool any_trainable() const;
  void set_trainable(bool on);
  /// Sets the flag for units [begin, end).
  void set_trainable_rows(int begin, int end, bool on = true);
};

/// Ordered dense layers. `revision` changes whenever parameters are updated
/// so that stale forward caches can be detected.
struct ModelParams {
  std::vector<DenseLayer> layers;
  std::uint64_t revision = 0;

  bool empty() const { return layers.empty(); }
  int input_size() const { return layers.empty() ? 0 : layers.front().in_size(); }
  int output_size() const { return layers.empty() ? 0 : layers.back().out_size(); }

  void validate() const;
  void freeze_all();
  void unfreeze_all();
};

/// Dense chain widths[0] -> widths[1] -> ... with `hidden` activations on all
/// but the last layer. Uniform init with bound sqrt(3 * gain^2 / fan_in),
/// gain sqrt(2) for leaky layers; zero biases.
ModelParams make_mlp(std::span<const int> widths, Activation hidden, Activation output, Rng& rng);

struct ForwardCache {
  const ModelParams* model = nullptr;
  std::uint64_t revision = 0;
  std::vector<Matrix> inputs;           // input to each layer
  std::vector<Matrix> pre_activations;  // W x + b for each layer
};

/// Column-batched forward pass (one sample per column). Fills `cache` when given.
Matrix forward(const ModelParams& model, const Matrix& x, ForwardCache* cache = nullptr);
Vector forward(const ModelParams& model, const Vector& x);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static Gradients zeros_like(const ModelParams& model);
};

struct BackwardResult {
  Gradients grads;
  Matrix input_grad;
};

/// Backpropagates dLoss/dOutput (same layout as the forward output). Gradients
/// of frozen units are exactly zero. Throws UsageError if the cache does not
/// belong to the current revision of `model`.
BackwardResult backward(const ModelParams& model, const Matrix& output_grad,
                        const ForwardCache& cache);

/// e_lambda: ones on the first `lambda` of `lambda_max` positions.
class MaskVector {
 public:
  MaskVector(int lambda, int lambda_max);

  int lambda() const { return lambda_; }
  int lambda_max() const { return lambda_max_; }
  bool operator[](int i) const { return i < lambda_; }
  Vector as_vector() const;

 private:
  int lambda_;
  int lambda_max_;
};

Vector apply_mask(const Vector& z, const MaskVector& m);
/// Row-wise mask over a column batch. Also the mask's backward pass.
Matrix apply_mask(const Matrix& z, const MaskVector& m);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<Matrix> m_weights, v_weights;
  std::vector<Vector> m_biases, v_biases;

  static OptimizerState for_model(const ModelParams& model, AdamConfig config = {});
};

/// One Adam update. Frozen units (and their moments) are left untouched.
void optimizer_step(ModelParams& model, const Gradients& grads, OptimizerState& state);

/// Sum over layers of in*out + out.
std::int64_t count_params(const ModelParams& model);

/// Multiply-adds counted as two flops, plus one per bias add.
std::int64_t count_flops(const ModelParams& model);

}  // namespace csiae
