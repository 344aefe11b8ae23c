#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geofair/dataset.hpp"
#include "geofair/mlp.hpp"
#include "geofair/trainer.hpp"

namespace geofair {

/// Income-threshold partition of a dataset: source = income strictly above
/// the split, target = income at or below it.
struct DomainSplit {
  DatasetManifest source;
  DatasetManifest target;
  double split_income = 600.0;
};

/// Partitions by income, preserving order within each side. Throws
/// ValidationError naming the side if either domain comes out empty.
DomainSplit split_domains(const DatasetManifest& manifest, double split_income = 600.0);

/// ADDA hyperparameters. Source and target encoders share encoder_config;
/// the discriminator must be a 3-layer FFN (two hidden layers) with a
/// single output logit.
struct AddaConfig {
  MlpConfig encoder_config;
  MlpConfig classifier_config;
  MlpConfig discriminator_config;
  int adversarial_steps = 500;
  int disc_steps_per_gen_step = 1;
  int batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  void validate() const;

  /// Discriminator default: latent -> 256 -> 256 -> 1 with ReLU, no dropout.
  static MlpConfig default_discriminator(std::size_t latent_dim);
};

struct SourceTrainResult {
  MlpModel encoder;
  MlpModel classifier;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  std::vector<EpochStats> log;
};

/// Step 1: jointly trains encoder and classifier with NLL on the source
/// domain only (80/20 holdout by hashed id for the reported accuracies).
SourceTrainResult train_source(const DomainSplit& split, const AddaConfig& config,
                               const TrainConfig& train_config);

struct AdversarialStep {
  int step = 0;
  double disc_loss = 0.0;
  double gen_loss = 0.0;
  double disc_accuracy = 0.0;
};

struct AddaResult {
  MlpModel source_encoder;
  MlpModel target_encoder;
  MlpModel classifier;  // filled by the pipeline, not by adapt_target
  MlpModel discriminator;
  std::vector<AdversarialStep> history;
};

/// Step 2: adversarial adaptation. The target encoder starts from the
/// source encoder's parameters and is trained so the discriminator cannot
/// tell its features from source features; the discriminator sees source
/// features labeled 1 and target features labeled 0, and the encoder is
/// updated against the inverted label (its own features labeled 1). The
/// source encoder is held constant throughout. One history record per
/// adversarial step (disc_loss/disc_accuracy are from the step's last
/// discriminator update).
AddaResult adapt_target(const DomainSplit& split, const MlpModel& source_encoder,
                        const AddaConfig& config, Rng& rng);

struct TransferAccuracy {
  double source_accuracy = 0.0;
  double target_accuracy = 0.0;
};

/// Top-k accuracy of encoder+classifier on the source and target validation
/// holdouts. Requires 1 <= k < num_classes.
TransferAccuracy evaluate_transfer(const DomainSplit& split, const MlpModel& encoder,
                                   const MlpModel& classifier, int k);

/// Step 3 (optional): retrains the classifier with NLL on target features
/// produced by the frozen target encoder.
MlpModel finetune_classifier_on_target(const MlpModel& target_encoder,
                                       const MlpModel& classifier,
                                       const DomainSplit& split,
                                       const TrainConfig& train_config);

std::string adversarial_history_to_csv(const std::vector<AdversarialStep>& history);
void write_adversarial_history(const std::vector<AdversarialStep>& history,
                               const std::filesystem::path& path);

}  // namespace geofair
