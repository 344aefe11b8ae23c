#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "geofair/matrix.hpp"
#include "geofair/rng.hpp"

namespace geofair {

/// Architecture of a feed-forward network: input -> hidden... -> output.
/// Hidden layers apply ReLU (per-layer switchable) followed by inverted
/// dropout; the output layer is linear and emits raw logits.
struct MlpConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims = {256, 256};
  std::size_t output_dim = 0;
  double dropout_prob = 0.3;
  /// Per-hidden-layer ReLU switches; empty means ReLU everywhere.
  std::vector<std::uint8_t> use_relu = {};

  /// Number of weight matrices (hidden layers + output layer).
  std::size_t layer_count() const { return hidden_dims.size() + 1; }

  bool relu_at(std::size_t hidden_index) const {
    if (use_relu.empty()) return true;
    return use_relu[hidden_index] != 0;
  }

  /// Width of the input feeding layer `l`.
  std::size_t layer_in(std::size_t l) const {
    return l == 0 ? input_dim : hidden_dims[l - 1];
  }

  /// Width of the output of layer `l`.
  std::size_t layer_out(std::size_t l) const {
    return l == hidden_dims.size() ? output_dim : hidden_dims[l];
  }

  void validate() const;

  bool operator==(const MlpConfig&) const = default;
};

/// Parameters of a feed-forward classifier, encoder, or discriminator.
/// weights[l] has shape (layer_in(l) x layer_out(l)).
struct MlpModel {
  MlpConfig config;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  bool operator==(const MlpModel&) const = default;
};

/// Glorot-uniform weights in [-sqrt(6/(fan_in+fan_out)), +...], zero biases.
MlpModel initialize_mlp(const MlpConfig& config, Rng& rng);

/// Everything backward() needs from a forward pass: per-layer inputs,
/// pre-activations, and the scaled dropout masks drawn during training.
struct ForwardCache {
  std::vector<Matrix> layer_inputs;
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> dropout_masks;  // empty when not training or p == 0
  bool training = false;
  std::size_t batch_rows = 0;
  std::vector<std::size_t> layer_dims;  // shape fingerprint of the model used
};

/// Runs the network on a batch (rows are samples). When `training` is true,
/// inverted dropout scales kept hidden activations by 1/(1 - dropout_prob);
/// when false dropout is the identity. Returns raw logits (softmax lives in
/// the losses module). `cache` may be null for inference-only calls.
Matrix forward(const MlpModel& model, const Matrix& batch, bool training,
               Rng& rng, ForwardCache* cache = nullptr);

/// Evaluation-mode forward pass; no RNG needed because dropout is disabled.
Matrix forward_eval(const MlpModel& model, const Matrix& batch);

/// Parameter gradients, mirroring MlpModel shapes.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

Gradients zero_gradients(const MlpModel& model);

struct BackwardResult {
  Gradients grads;
  /// dLoss/dInput of the whole network; lets models be chained
  /// (classifier -> encoder, discriminator -> generator).
  Matrix input_grad;
};

/// Exact analytic gradients for the forward pass recorded in `cache`,
/// honoring its dropout masks. Throws ValidationError if the cache does not
/// match the model or the upstream gradient shape.
BackwardResult backward(const MlpModel& model, const ForwardCache& cache,
                        const Matrix& dloss_dlogits);

/// Adam optimizer state. Accumulator shapes mirror the model parameters.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step_count = 0;
  Gradients first_moment;
  Gradients second_moment;

  static AdamState for_model(const MlpModel& model, double learning_rate = 1e-3);
};

/// One bias-corrected Adam update, in place. step_count increments by one.
/// Throws NumericError naming the layer if any gradient entry is non-finite.
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state);

struct LayerCheck {
  std::size_t layer = 0;
  double relative_error = 0.0;  // ||analytic - numeric|| / max(norms)
  bool passed = false;
};

struct GradientCheckReport {
  std::vector<LayerCheck> layers;
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Scalar loss plus its analytic gradient with respect to the logits.
struct LossEvaluation {
  double value = 0.0;
  Matrix dloss_dlogits;
};
using LossFn = std::function<LossEvaluation(const Matrix& logits)>;

/// Compares analytic gradients (backward pass fed with loss_fn's
/// dloss_dlogits) against central finite differences of the loss value over
/// every parameter, layer by layer. Runs in evaluation mode so the loss
/// surface is deterministic. Relative error per layer is
/// ||analytic - numeric||_2 / max(||analytic||, ||numeric||, 1e-12).
GradientCheckReport gradient_check(const MlpModel& model, const Matrix& batch,
                                   const LossFn& loss_fn, double tolerance,
                                   double step = 1e-5);

}  // namespace geofair
