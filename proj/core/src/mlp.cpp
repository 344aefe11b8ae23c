#include "geofair/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace geofair {

namespace {

std::vector<std::size_t> dims_of(const MlpConfig& config) {
  std::vector<std::size_t> dims;
  dims.push_back(config.input_dim);
  for (std::size_t h : config.hidden_dims) dims.push_back(h);
  dims.push_back(config.output_dim);
  return dims;
}

}  // namespace

void MlpConfig::validate() const {
  if (input_dim == 0) throw ValidationError("MlpConfig: input_dim must be positive");
  if (output_dim == 0) throw ValidationError("MlpConfig: output_dim must be positive");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw ValidationError("MlpConfig: hidden dims must be positive");
  }
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) {
    throw ValidationError("MlpConfig: dropout_prob must lie in [0, 1)");
  }
  if (!use_relu.empty() && use_relu.size() != hidden_dims.size()) {
    throw ValidationError("MlpConfig: use_relu length must match hidden_dims");
  }
}

MlpModel initialize_mlp(const MlpConfig& config, Rng& rng) {
  config.validate();
  MlpModel model;
  model.config = config;
  for (std::size_t l = 0; l < config.layer_count(); ++l) {
    const std::size_t fan_in = config.layer_in(l);
    const std::size_t fan_out = config.layer_out(l);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (double& v : w.storage()) v = rng.uniform(-limit, limit);
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(fan_out, 0.0);
  }
  return model;
}

namespace {

void check_model_shapes(const MlpModel& model) {
  const MlpConfig& c = model.config;
  if (model.weights.size() != c.layer_count() || model.biases.size() != c.layer_count()) {
    throw ShapeError("model has " + std::to_string(model.weights.size()) +
                     " weight matrices for " + std::to_string(c.layer_count()) +
                     " layers");
  }
  for (std::size_t l = 0; l < c.layer_count(); ++l) {
    if (model.weights[l].rows() != c.layer_in(l) ||
        model.weights[l].cols() != c.layer_out(l)) {
      throw ShapeError("layer " + std::to_string(l) + " weights are " +
                       model.weights[l].shape_string() + ", expected " +
                       std::to_string(c.layer_in(l)) + "x" +
                       std::to_string(c.layer_out(l)));
    }
    if (model.biases[l].size() != c.layer_out(l)) {
      throw ShapeError("layer " + std::to_string(l) + " bias length mismatch");
    }
  }
}

}  // namespace

Matrix forward(const MlpModel& model, const Matrix& batch, bool training,
               Rng& rng, ForwardCache* cache) {
  const MlpConfig& c = model.config;
  check_model_shapes(model);
  if (batch.cols() != c.input_dim) {
    throw ShapeError("forward: batch has " + std::to_string(batch.cols()) +
                     " features, layer 0 expects " + std::to_string(c.input_dim));
  }

  if (cache) {
    *cache = ForwardCache{};
    cache->training = training;
    cache->batch_rows = batch.rows();
    cache->layer_dims = dims_of(c);
  }

  const bool use_dropout = training && c.dropout_prob > 0.0;
  const double keep = 1.0 - c.dropout_prob;

  Matrix h = batch;
  for (std::size_t l = 0; l < c.layer_count(); ++l) {
    if (cache) cache->layer_inputs.push_back(h);
    Matrix z = matmul(h, model.weights[l]);
    add_row_vector(z, model.biases[l]);
    if (cache) cache->pre_activations.push_back(z);

    if (l + 1 == c.layer_count()) {
      h = std::move(z);  // linear output layer: raw logits
      break;
    }

    Matrix a = std::move(z);
    if (c.relu_at(l)) {
      for (double& v : a.storage()) v = v > 0.0 ? v : 0.0;
    }
    if (use_dropout) {
      Matrix mask(a.rows(), a.cols());
      for (std::size_t i = 0; i < mask.size(); ++i) {
        mask.storage()[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
      }
      for (std::size_t i = 0; i < a.size(); ++i) a.storage()[i] *= mask.storage()[i];
      if (cache) cache->dropout_masks.push_back(std::move(mask));
    }
    h = std::move(a);
  }
  return h;
}

Matrix forward_eval(const MlpModel& model, const Matrix& batch) {
  Rng unused(0);
  return forward(model, batch, /*training=*/false, unused, nullptr);
}

Gradients zero_gradients(const MlpModel& model) {
  Gradients g;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    g.weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
    g.biases.emplace_back(model.biases[l].size(), 0.0);
  }
  return g;
}

BackwardResult backward(const MlpModel& model, const ForwardCache& cache,
                        const Matrix& dloss_dlogits) {
  const MlpConfig& c = model.config;
  check_model_shapes(model);
  if (cache.layer_dims != dims_of(c)) {
    throw ValidationError("backward: cache was produced by a different architecture");
  }
  if (cache.layer_inputs.size() != c.layer_count() ||
      cache.pre_activations.size() != c.layer_count()) {
    throw ValidationError("backward: incomplete forward cache");
  }
  if (dloss_dlogits.rows() != cache.batch_rows || dloss_dlogits.cols() != c.output_dim) {
    throw ShapeError("backward: upstream gradient is " + dloss_dlogits.shape_string() +
                     ", expected " + std::to_string(cache.batch_rows) + "x" +
                     std::to_string(c.output_dim));
  }
  const bool has_masks = !cache.dropout_masks.empty();
  if (has_masks && cache.dropout_masks.size() != c.hidden_dims.size()) {
    throw ValidationError("backward: dropout mask count does not match hidden layers");
  }

  BackwardResult result;
  result.grads.weights.resize(c.layer_count());
  result.grads.biases.resize(c.layer_count());

  Matrix dz = dloss_dlogits;
  for (std::size_t l = c.layer_count(); l-- > 0;) {
    result.grads.weights[l] = matmul_tn(cache.layer_inputs[l], dz);
    result.grads.biases[l] = column_sums(dz);
    Matrix dh = matmul_nt(dz, model.weights[l]);
    if (l == 0) {
      result.input_grad = std::move(dh);
      break;
    }
    const std::size_t hidden = l - 1;
    if (has_masks) {
      const Matrix& mask = cache.dropout_masks[hidden];
      for (std::size_t i = 0; i < dh.size(); ++i) dh.storage()[i] *= mask.storage()[i];
    }
    if (c.relu_at(hidden)) {
      const Matrix& z = cache.pre_activations[hidden];
      for (std::size_t i = 0; i < dh.size(); ++i) {
        if (z.storage()[i] <= 0.0) dh.storage()[i] = 0.0;
      }
    }
    dz = std::move(dh);
  }
  return result;
}

AdamState AdamState::for_model(const MlpModel& model, double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  state.first_moment = zero_gradients(model);
  state.second_moment = zero_gradients(model);
  return state;
}

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state) {
  check_model_shapes(model);
  if (grads.weights.size() != model.weights.size() ||
      grads.biases.size() != model.biases.size()) {
    throw ShapeError("adam_step: gradient layer count mismatch");
  }
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    if (!grads.weights[l].same_shape(model.weights[l]) ||
        grads.biases[l].size() != model.biases[l].size()) {
      throw ShapeError("adam_step: gradient shape mismatch at layer " + std::to_string(l));
    }
    if (!grads.weights[l].all_finite()) {
      throw NumericError("adam_step: non-finite weight gradient at layer " +
                         std::to_string(l));
    }
    for (double v : grads.biases[l]) {
      if (!std::isfinite(v)) {
        throw NumericError("adam_step: non-finite bias gradient at layer " +
                           std::to_string(l));
      }
    }
  }

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  auto update = [&](double& param, double grad, double& m, double& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * grad;
    v = state.beta2 * v + (1.0 - state.beta2) * grad * grad;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    param -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  };

  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    auto& w = model.weights[l].storage();
    const auto& gw = grads.weights[l].storage();
    auto& mw = state.first_moment.weights[l].storage();
    auto& vw = state.second_moment.weights[l].storage();
    for (std::size_t i = 0; i < w.size(); ++i) update(w[i], gw[i], mw[i], vw[i]);

    auto& b = model.biases[l];
    const auto& gb = grads.biases[l];
    auto& mb = state.first_moment.biases[l];
    auto& vb = state.second_moment.biases[l];
    for (std::size_t i = 0; i < b.size(); ++i) update(b[i], gb[i], mb[i], vb[i]);
  }
}

namespace {

double l2_norm_diff(const std::vector<double>& a, const std::vector<double>& b,
                    double& norm_a, double& norm_b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  return d;
}

}  // namespace

GradientCheckReport gradient_check(const MlpModel& model, const Matrix& batch,
                                   const LossFn& loss_fn, double tolerance,
                                   double step) {
  MlpModel probe = model;
  Rng unused(0);

  ForwardCache cache;
  Matrix logits = forward(probe, batch, /*training=*/false, unused, &cache);
  BackwardResult analytic = backward(probe, cache, loss_fn(logits).dloss_dlogits);

  GradientCheckReport report;
  report.passed = true;
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    std::vector<double> numeric;
    std::vector<double> exact;
    auto probe_param = [&](double& p, double analytic_grad) {
      const double original = p;
      p = original + step;
      const double up = loss_fn(forward(probe, batch, false, unused, nullptr)).value;
      p = original - step;
      const double down = loss_fn(forward(probe, batch, false, unused, nullptr)).value;
      p = original;
      numeric.push_back((up - down) / (2.0 * step));
      exact.push_back(analytic_grad);
    };
    for (std::size_t i = 0; i < probe.weights[l].size(); ++i) {
      probe_param(probe.weights[l].storage()[i], analytic.grads.weights[l].storage()[i]);
    }
    for (std::size_t i = 0; i < probe.biases[l].size(); ++i) {
      probe_param(probe.biases[l][i], analytic.grads.biases[l][i]);
    }

    double na = 0.0, nb = 0.0;
    const double diff = std::sqrt(l2_norm_diff(exact, numeric, na, nb));
    const double scale = std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
    LayerCheck check;
    check.layer = l;
    check.relative_error = diff / scale;
    check.passed = check.relative_error < tolerance;
    report.max_relative_error = std::max(report.max_relative_error, check.relative_error);
    report.passed = report.passed && check.passed;
    report.layers.push_back(check);
  }
  return report;
}

}  // namespace geofair
