#include "geofair/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace geofair {

namespace {

constexpr double kProbFloor = 1e-12;

double log_clamped(double p) { return std::log(std::max(p, kProbFloor)); }

void check_labels(const Matrix& logits, const std::vector<int>& labels) {
  if (labels.size() != logits.rows()) {
    throw ShapeError("labels length " + std::to_string(labels.size()) +
                     " does not match batch of " + std::to_string(logits.rows()));
  }
  const int num_classes = static_cast<int>(logits.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw ValidationError("label " + std::to_string(labels[i]) + " at row " +
                            std::to_string(i) + " is outside [0, " +
                            std::to_string(num_classes) + ")");
    }
  }
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const double* row = logits.data() + i * logits.cols();
    double* out = probs.data() + i * logits.cols();
    double max_logit = row[0];
    for (std::size_t j = 1; j < logits.cols(); ++j) max_logit = std::max(max_logit, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      out[j] = std::exp(row[j] - max_logit);
      sum += out[j];
    }
    for (std::size_t j = 0; j < logits.cols(); ++j) out[j] /= sum;
  }
  return probs;
}

BatchLossResult nll_loss(const Matrix& logits, const std::vector<int>& labels) {
  check_labels(logits, labels);
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  const double inv_batch = 1.0 / static_cast<double>(batch);

  Matrix probs = softmax_rows(logits);
  BatchLossResult result;
  result.per_sample_losses.resize(batch);
  result.dloss_dlogits = probs;

  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t t = static_cast<std::size_t>(labels[i]);
    result.per_sample_losses[i] = -log_clamped(probs(i, t));
    total += result.per_sample_losses[i];
    double* grow = result.dloss_dlogits.data() + i * classes;
    grow[t] -= 1.0;
    for (std::size_t j = 0; j < classes; ++j) grow[j] *= inv_batch;
  }
  result.value = total * inv_batch;
  return result;
}

BatchLossResult weighted_batch_loss(const Matrix& logits,
                                    const std::vector<int>& labels,
                                    const std::vector<double>& incomes) {
  check_labels(logits, labels);
  if (incomes.size() != logits.rows()) {
    throw ShapeError("incomes length does not match batch size");
  }
  for (std::size_t i = 0; i < incomes.size(); ++i) {
    if (!(incomes[i] > 0.0)) {
      throw ValidationError("income at row " + std::to_string(i) +
                            " must be strictly positive, got " +
                            std::to_string(incomes[i]));
    }
  }

  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  double mean_income = 0.0;
  for (double inc : incomes) mean_income += inc;
  mean_income /= static_cast<double>(batch);

  Matrix probs = softmax_rows(logits);
  BatchLossResult result;
  result.per_sample_losses.resize(batch);
  result.dloss_dlogits = probs;

  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t t = static_cast<std::size_t>(labels[i]);
    const double nll = -log_clamped(probs(i, t));
    const double weight = mean_income / incomes[i];
    result.per_sample_losses[i] = weight * nll;
    total += result.per_sample_losses[i];
    double* grow = result.dloss_dlogits.data() + i * classes;
    grow[t] -= 1.0;
    for (std::size_t j = 0; j < classes; ++j) grow[j] *= weight;
  }
  result.value = total;  // batch sum, not mean
  return result;
}

BatchLossResult focal_loss(const Matrix& logits, const std::vector<int>& labels,
                           const FocalConfig& config) {
  check_labels(logits, labels);
  if (!(config.gamma >= 0.0) || !std::isfinite(config.gamma)) {
    throw ValidationError("focal gamma must be finite and >= 0");
  }
  const double gamma = config.gamma;
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  const double inv_batch = 1.0 / static_cast<double>(batch);

  Matrix probs = softmax_rows(logits);
  BatchLossResult result;
  result.per_sample_losses.resize(batch);
  result.dloss_dlogits = probs;

  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t t = static_cast<std::size_t>(labels[i]);
    const double pt = probs(i, t);
    const double miss = 1.0 - pt;  // modulating base, unclamped
    const double log_pt = log_clamped(pt);
    const double modulator = gamma == 0.0 ? 1.0 : std::pow(miss, gamma);
    result.per_sample_losses[i] = -modulator * log_pt;
    total += result.per_sample_losses[i];

    // d/dz_j of -(1-p_t)^g log p_t is
    //   [ (1-p_t)^g - g (1-p_t)^(g-1) p_t log p_t ] * (p_j - onehot_j)
    double coeff = modulator;
    if (gamma > 0.0 && miss > 0.0) {
      coeff -= gamma * std::pow(miss, gamma - 1.0) * pt * log_pt;
    }
    double* grow = result.dloss_dlogits.data() + i * classes;
    grow[t] -= 1.0;
    for (std::size_t j = 0; j < classes; ++j) grow[j] *= coeff * inv_batch;
  }
  result.value = total * inv_batch;
  return result;
}

BatchLossResult bce_with_logits(const Matrix& logits, const std::vector<int>& targets) {
  if (logits.cols() != 1) {
    throw ShapeError("bce_with_logits expects one logit column, got " +
                     logits.shape_string());
  }
  if (targets.size() != logits.rows()) {
    throw ShapeError("targets length does not match batch size");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] != 0 && targets[i] != 1) {
      throw ValidationError("binary target at row " + std::to_string(i) +
                            " must be 0 or 1");
    }
  }

  const std::size_t batch = logits.rows();
  const double inv_batch = 1.0 / static_cast<double>(batch);
  BatchLossResult result;
  result.per_sample_losses.resize(batch);
  result.dloss_dlogits = Matrix(batch, 1);

  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const double z = logits(i, 0);
    const double y = static_cast<double>(targets[i]);
    // max(z,0) - z*y + log(1 + exp(-|z|))
    const double loss = std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    result.per_sample_losses[i] = loss;
    total += loss;
    const double sigma = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                                  : std::exp(z) / (1.0 + std::exp(z));
    result.dloss_dlogits(i, 0) = (sigma - y) * inv_batch;
  }
  result.value = total * inv_batch;
  return result;
}

}  // namespace geofair
