#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geofair/dataset.hpp"
#include "geofair/losses.hpp"
#include "geofair/mlp.hpp"

namespace geofair {

/// Bias-mitigation method applied during training. Sampled uses the plain
/// NLL objective; its effect comes from resampling the training manifest
/// beforehand (see resample_to_threshold).
enum class TrainMethod { Baseline, Weighted, Sampled, Focal };

std::string_view train_method_name(TrainMethod method);
std::optional<TrainMethod> train_method_from_name(std::string_view name);

struct TrainConfig {
  int epochs = 1;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double focal_gamma = 2.0;  // used by TrainMethod::Focal only
  int topk = 1;              // k for the per-epoch accuracy log
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochStats> log;
};

/// Minibatch training of a classifier head on fixed feature vectors.
/// Deterministic given (config seed, architecture, data): shuffling, dropout
/// and initialization all draw from one seeded stream. `validation` may be
/// empty, in which case val_accuracy is reported as 0.
TrainResult train_classifier(const DatasetManifest& train,
                             const DatasetManifest& validation,
                             const MlpConfig& architecture, TrainMethod method,
                             const TrainConfig& config);

/// Builds the feature matrix / labels / incomes of the given sample rows.
struct BatchView {
  Matrix features;
  std::vector<int> labels;
  std::vector<double> incomes;
};
BatchView assemble_batch(const DatasetManifest& manifest,
                         const std::vector<std::size_t>& rows);

std::string train_log_to_csv(const std::vector<EpochStats>& log);

}  // namespace geofair
