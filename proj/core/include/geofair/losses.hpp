#pragma once

#include <vector>

#include "geofair/matrix.hpp"

namespace geofair {

/// Loss of one batch: scalar value, gradient with respect to the logits,
/// and the per-sample losses before reduction.
struct BatchLossResult {
  double value = 0.0;
  Matrix dloss_dlogits;
  std::vector<double> per_sample_losses;
};

/// Row-wise softmax with max subtraction for stability.
Matrix softmax_rows(const Matrix& logits);

/// Negative log likelihood over softmax, mean-reduced over the batch.
/// gradient = (softmax - one_hot) / batch_size.
BatchLossResult nll_loss(const Matrix& logits, const std::vector<int>& labels);

/// Income-weighted batch loss: each sample's NLL is divided by its income,
/// the batch is SUM-reduced (not mean-reduced, unlike the other losses, so
/// its magnitude grows with batch size), and the total is normalized by the
/// arithmetic mean income of the batch:
///
///   value = mean(incomes) * sum_i nll_i / incomes[i]
///
/// Scaling every income by the same positive constant leaves value and
/// gradient unchanged.
BatchLossResult weighted_batch_loss(const Matrix& logits,
                                    const std::vector<int>& labels,
                                    const std::vector<double>& incomes);

struct FocalConfig {
  /// Down-weighting rate for easy examples; 0 reduces to plain NLL.
  double gamma = 2.0;
};

/// Focal loss: per-sample -(1 - p_t)^gamma * log(p_t) with p_t the softmax
/// probability of the true class, mean-reduced. p_t is clamped to >= 1e-12
/// inside the log only; the modulating factor uses the raw value.
BatchLossResult focal_loss(const Matrix& logits, const std::vector<int>& labels,
                           const FocalConfig& config);

/// Numerically stable binary cross-entropy on raw logits (one column),
/// mean-reduced. Targets must be 0 or 1.
BatchLossResult bce_with_logits(const Matrix& logits, const std::vector<int>& targets);

}  // namespace geofair
