#include "csiae/neural.hpp"

#include <cmath>
#include <string>

#include "csiae/errors.hpp"

namespace csiae {

namespace {

void activate(Matrix& z, Activation a) {
  switch (a) {
    case Activation::linear: return;
    case Activation::leaky_relu:
      z = z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
      return;
    case Activation::tanh: z = z.array().tanh().matrix(); return;
  }
}

// dact/dz evaluated at the pre-activation, multiplied into `grad`.
void apply_derivative(Matrix& grad, const Matrix& pre, Activation a) {
  switch (a) {
    case Activation::linear: return;
    case Activation::leaky_relu:
      grad.array() *=
          pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : kLeakySlope; }).array();
      return;
    case Activation::tanh:
      grad.array() *= (1.0 - pre.array().tanh().square());
      return;
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "linear") return Activation::linear;
  if (name == "leaky_relu") return Activation::leaky_relu;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

DenseLayer::DenseLayer(int in, int out, Activation act)
    : weights(Matrix::Zero(out, in)),
      biases(Vector::Zero(out)),
      activation(act),
      trainable(static_cast<std::size_t>(out), 1) {}

bool DenseLayer::any_trainable() const {
  for (auto t : trainable) {
    if (t) return true;
  }
  return false;
}

void DenseLayer::set_trainable(bool on) { std::fill(trainable.begin(), trainable.end(), on); }

void DenseLayer::set_trainable_rows(int begin, int end, bool on) {
  if (begin < 0 || end > out_size() || begin > end) {
    throw ArgumentError("set_trainable_rows: range outside the layer");
  }
  for (int i = begin; i < end; ++i) trainable[i] = on;
}

void ModelParams::validate() const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.biases.size() != l.weights.rows() ||
        l.trainable.size() != static_cast<std::size_t>(l.out_size())) {
      throw ArgumentError("layer " + std::to_string(i) + " has inconsistent shapes");
    }
    if (i > 0 && layers[i - 1].out_size() != l.in_size()) {
      throw ArgumentError("layer " + std::to_string(i) + " does not chain with its predecessor");
    }
    if (!l.weights.allFinite() || !l.biases.allFinite()) {
      throw ArgumentError("layer " + std::to_string(i) + " has non-finite parameters");
    }
  }
}

void ModelParams::freeze_all() {
  for (auto& l : layers) l.set_trainable(false);
}

void ModelParams::unfreeze_all() {
  for (auto& l : layers) l.set_trainable(true);
}

ModelParams make_mlp(std::span<const int> widths, Activation hidden, Activation output, Rng& rng) {
  if (widths.size() < 2) throw ConfigError("an MLP needs at least an input and output width");
  ModelParams m;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    if (widths[i] < 1 || widths[i + 1] < 1) throw ConfigError("MLP widths must be positive");
    const Activation act = i + 2 == widths.size() ? output : hidden;
    DenseLayer layer(widths[i], widths[i + 1], act);
    const double gain2 = act == Activation::leaky_relu ? 2.0 : 1.0;
    const double bound = std::sqrt(3.0 * gain2 / widths[i]);
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Row-major fill order so the init does not depend on Eigen's storage order.
    for (int r = 0; r < layer.out_size(); ++r) {
      for (int c = 0; c < layer.in_size(); ++c) layer.weights(r, c) = dist(rng);
    }
    m.layers.push_back(std::move(layer));
  }
  return m;
}

Matrix forward(const ModelParams& model, const Matrix& x, ForwardCache* cache) {
  if (x.rows() != model.input_size()) {
    throw ArgumentError("forward: input has " + std::to_string(x.rows()) +
                        " rows, model expects " + std::to_string(model.input_size()));
  }
  if (cache) {
    cache->model = &model;
    cache->revision = model.revision;
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  Matrix a = x;
  for (const auto& layer : model.layers) {
    Matrix z = layer.weights * a;
    z.colwise() += layer.biases;
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre_activations.push_back(z);
    }
    activate(z, layer.activation);
    a = std::move(z);
  }
  return a;
}

Vector forward(const ModelParams& model, const Vector& x) {
  return forward(model, Matrix(x), nullptr).col(0);
}

Gradients Gradients::zeros_like(const ModelParams& model) {
  Gradients g;
  for (const auto& l : model.layers) {
    g.weights.push_back(Matrix::Zero(l.out_size(), l.in_size()));
    g.biases.push_back(Vector::Zero(l.out_size()));
  }
  return g;
}

BackwardResult backward(const ModelParams& model, const Matrix& output_grad,
                        const ForwardCache& cache) {
  if (cache.model != &model || cache.revision != model.revision ||
      cache.inputs.size() != model.layers.size()) {
    throw UsageError("backward: forward cache is stale or belongs to another model");
  }
  if (output_grad.rows() != model.output_size() ||
      (!cache.inputs.empty() && output_grad.cols() != cache.inputs.front().cols())) {
    throw ArgumentError("backward: output gradient shape does not match the forward pass");
  }
  BackwardResult out;
  out.grads.weights.resize(model.layers.size());
  out.grads.biases.resize(model.layers.size());
  Matrix delta = output_grad;
  for (std::size_t i = model.layers.size(); i-- > 0;) {
    const auto& layer = model.layers[i];
    apply_derivative(delta, cache.pre_activations[i], layer.activation);
    Matrix gw = delta * cache.inputs[i].transpose();
    Vector gb = delta.rowwise().sum();
    for (int r = 0; r < layer.out_size(); ++r) {
      if (!layer.is_trainable(r)) {
        gw.row(r).setZero();
        gb(r) = 0.0;
      }
    }
    out.grads.weights[i] = std::move(gw);
    out.grads.biases[i] = std::move(gb);
    delta = layer.weights.transpose() * delta;
  }
  out.input_grad = std::move(delta);
  return out;
}

MaskVector::MaskVector(int lambda, int lambda_max) : lambda_(lambda), lambda_max_(lambda_max) {
  if (lambda_max < 0 || lambda < 0 || lambda > lambda_max) {
    throw ArgumentError("mask requires 0 <= lambda <= lambda_max");
  }
}

Vector MaskVector::as_vector() const {
  Vector e = Vector::Zero(lambda_max_);
  e.head(lambda_).setOnes();
  return e;
}

Vector apply_mask(const Vector& z, const MaskVector& m) {
  if (z.size() != m.lambda_max()) throw ArgumentError("apply_mask: length mismatch");
  Vector out = z;
  out.tail(m.lambda_max() - m.lambda()).setZero();
  return out;
}

Matrix apply_mask(const Matrix& z, const MaskVector& m) {
  if (z.rows() != m.lambda_max()) throw ArgumentError("apply_mask: length mismatch");
  Matrix out = z;
  out.bottomRows(m.lambda_max() - m.lambda()).setZero();
  return out;
}

OptimizerState OptimizerState::for_model(const ModelParams& model, AdamConfig config) {
  OptimizerState s;
  s.config = config;
  for (const auto& l : model.layers) {
    s.m_weights.push_back(Matrix::Zero(l.out_size(), l.in_size()));
    s.v_weights.push_back(Matrix::Zero(l.out_size(), l.in_size()));
    s.m_biases.push_back(Vector::Zero(l.out_size()));
    s.v_biases.push_back(Vector::Zero(l.out_size()));
  }
  return s;
}

void optimizer_step(ModelParams& model, const Gradients& grads, OptimizerState& state) {
  const std::size_t n = model.layers.size();
  if (grads.weights.size() != n || grads.biases.size() != n || state.m_weights.size() != n) {
    throw ArgumentError("optimizer_step: layer count mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = model.layers[i];
    if (grads.weights[i].rows() != l.weights.rows() ||
        grads.weights[i].cols() != l.weights.cols() || grads.biases[i].size() != l.biases.size() ||
        state.m_weights[i].rows() != l.weights.rows() ||
        state.m_weights[i].cols() != l.weights.cols()) {
      throw ArgumentError("optimizer_step: shape mismatch in layer " + std::to_string(i));
    }
  }

  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(c.beta1, t);
  const double corr2 = 1.0 - std::pow(c.beta2, t);

  auto update = [&](double& p, double& m, double& v, double g) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    const double m_hat = m / corr1;
    const double v_hat = v / corr2;
    p -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  };

  for (std::size_t i = 0; i < n; ++i) {
    auto& l = model.layers[i];
    // Column-major traversal to follow Eigen's storage.
    for (int col = 0; col < l.in_size(); ++col) {
      for (int r = 0; r < l.out_size(); ++r) {
        if (!l.is_trainable(r)) continue;
        update(l.weights(r, col), state.m_weights[i](r, col), state.v_weights[i](r, col),
               grads.weights[i](r, col));
      }
    }
    for (int r = 0; r < l.out_size(); ++r) {
      if (!l.is_trainable(r)) continue;
      update(l.biases(r), state.m_biases[i](r), state.v_biases[i](r), grads.biases[i](r));
    }
  }
  ++model.revision;
}

std::int64_t count_params(const ModelParams& model) {
  std::int64_t n = 0;
  for (const auto& l : model.layers) {
    n += static_cast<std::int64_t>(l.in_size()) * l.out_size() + l.out_size();
  }
  return n;
}

std::int64_t count_flops(const ModelParams& model) {
  std::int64_t n = 0;
  for (const auto& l : model.layers) {
    n += 2 * static_cast<std::int64_t>(l.in_size()) * l.out_size() + l.out_size();
  }
  return n;
}

}  // namespace csiae
