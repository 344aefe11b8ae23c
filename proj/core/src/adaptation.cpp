#include "geofair/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <span>

#include "geofair/evaluation.hpp"
#include "geofair/format.hpp"
#include "geofair/losses.hpp"

namespace geofair {

DomainSplit split_domains(const DatasetManifest& manifest, double split_income) {
  manifest.validate();
  if (!(split_income > 0.0)) throw ValidationError("split_income must be positive");

  DomainSplit split;
  split.split_income = split_income;
  split.source.num_classes = split.target.num_classes = manifest.num_classes;
  split.source.feature_dim = split.target.feature_dim = manifest.feature_dim;
  for (const Sample& s : manifest.samples) {
    (s.income > split_income ? split.source : split.target).samples.push_back(s);
  }
  if (split.source.empty()) {
    throw ValidationError("source domain empty: no incomes above " +
                          format_double(split_income));
  }
  if (split.target.empty()) {
    throw ValidationError("target domain empty: no incomes at or below " +
                          format_double(split_income));
  }
  return split;
}

void AddaConfig::validate() const {
  encoder_config.validate();
  classifier_config.validate();
  discriminator_config.validate();
  if (discriminator_config.hidden_dims.size() != 2) {
    throw ValidationError("discriminator must be a 3-layer FFN (two hidden layers)");
  }
  if (discriminator_config.output_dim != 1) {
    throw ValidationError("discriminator must emit a single logit");
  }
  if (encoder_config.output_dim != classifier_config.input_dim) {
    throw ShapeError("classifier input_dim must equal encoder output_dim");
  }
  if (encoder_config.output_dim != discriminator_config.input_dim) {
    throw ShapeError("discriminator input_dim must equal encoder output_dim");
  }
  if (adversarial_steps < 0) throw ValidationError("adversarial_steps must be >= 0");
  if (disc_steps_per_gen_step < 1) {
    throw ValidationError("disc_steps_per_gen_step must be >= 1");
  }
  if (batch_size <= 0) throw ValidationError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
}

MlpConfig AddaConfig::default_discriminator(std::size_t latent_dim) {
  MlpConfig config;
  config.input_dim = latent_dim;
  config.hidden_dims = {256, 256};
  config.output_dim = 1;
  config.dropout_prob = 0.0;
  return config;
}

namespace {

/// Joint encoder+classifier NLL training on one manifest.
struct JointTrainOutput {
  MlpModel encoder;
  MlpModel classifier;
  std::vector<EpochStats> log;
};

JointTrainOutput train_joint(const DatasetManifest& train,
                             const DatasetManifest& validation,
                             const MlpConfig& encoder_config,
                             const MlpConfig& classifier_config,
                             const TrainConfig& config) {
  config.validate();
  train.validate();
  Rng rng(config.seed);

  JointTrainOutput out;
  out.encoder = initialize_mlp(encoder_config, rng);
  out.classifier = initialize_mlp(classifier_config, rng);
  AdamState adam_enc = AdamState::for_model(out.encoder, config.learning_rate);
  AdamState adam_cls = AdamState::for_model(out.classifier, config.learning_rate);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const int k =
      std::min(config.topk, static_cast<int>(classifier_config.output_dim) - 1);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t size =
          std::min<std::size_t>(config.batch_size, order.size() - start);
      std::vector<std::size_t> rows(order.begin() + start, order.begin() + start + size);
      const BatchView batch = assemble_batch(train, rows);

      ForwardCache enc_cache, cls_cache;
      const Matrix latent =
          forward(out.encoder, batch.features, /*training=*/true, rng, &enc_cache);
      const Matrix logits =
          forward(out.classifier, latent, /*training=*/true, rng, &cls_cache);
      const BatchLossResult loss = nll_loss(logits, batch.labels);

      const BackwardResult cls_grads =
          backward(out.classifier, cls_cache, loss.dloss_dlogits);
      const BackwardResult enc_grads =
          backward(out.encoder, enc_cache, cls_grads.input_grad);
      adam_step(out.classifier, cls_grads.grads, adam_cls);
      adam_step(out.encoder, enc_grads.grads, adam_enc);
      loss_sum += loss.value;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.mean_loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    if (k >= 1) {
      const MlpModel* chain[] = {&out.encoder, &out.classifier};
      stats.train_accuracy =
          topk_accuracy(std::span<const MlpModel* const>(chain), train, k);
      if (!validation.empty()) {
        stats.val_accuracy =
            topk_accuracy(std::span<const MlpModel* const>(chain), validation, k);
      }
    }
    out.log.push_back(stats);
  }
  return out;
}

}  // namespace

SourceTrainResult train_source(const DomainSplit& split, const AddaConfig& config,
                               const TrainConfig& train_config) {
  config.validate();
  const TrainValSplit holdout = split_train_validation(split.source);

  JointTrainOutput joint = train_joint(holdout.train, holdout.validation,
                                       config.encoder_config, config.classifier_config,
                                       train_config);

  SourceTrainResult result;
  result.encoder = std::move(joint.encoder);
  result.classifier = std::move(joint.classifier);
  result.log = std::move(joint.log);
  if (!result.log.empty()) {
    result.train_accuracy = result.log.back().train_accuracy;
    result.val_accuracy = result.log.back().val_accuracy;
  }
  return result;
}

namespace {

std::vector<std::size_t> draw_rows(std::size_t count, std::size_t population, Rng& rng) {
  std::vector<std::size_t> rows(count);
  for (std::size_t& r : rows) r = rng.uniform_index(population);
  return rows;
}

}  // namespace

AddaResult adapt_target(const DomainSplit& split, const MlpModel& source_encoder,
                        const AddaConfig& config, Rng& rng) {
  config.validate();
  if (source_encoder.config != config.encoder_config) {
    throw ValidationError("source encoder does not match encoder_config");
  }
  const TrainValSplit source_holdout = split_train_validation(split.source);
  const TrainValSplit target_holdout = split_train_validation(split.target);
  const DatasetManifest& source_train = source_holdout.train;
  const DatasetManifest& target_train = target_holdout.train;
  if (source_train.empty() || target_train.empty()) {
    throw ValidationError("adversarial phase needs non-empty train splits");
  }

  AddaResult result;
  result.source_encoder = source_encoder;
  // Target encoder starts from the source encoder's parameters (same
  // architecture by construction).
  result.target_encoder = source_encoder;
  result.discriminator = initialize_mlp(config.discriminator_config, rng);

  AdamState adam_disc = AdamState::for_model(result.discriminator, config.learning_rate);
  AdamState adam_gen = AdamState::for_model(result.target_encoder, config.learning_rate);

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  std::vector<int> disc_labels(2 * batch);
  std::fill(disc_labels.begin(), disc_labels.begin() + batch, 1);  // source = real
  std::fill(disc_labels.begin() + batch, disc_labels.end(), 0);    // target = fake
  const std::vector<int> inverted_labels(batch, 1);

  for (int step = 0; step < config.adversarial_steps; ++step) {
    AdversarialStep record;
    record.step = step;

    for (int d = 0; d < config.disc_steps_per_gen_step; ++d) {
      const BatchView source_batch =
          assemble_batch(source_train, draw_rows(batch, source_train.size(), rng));
      const BatchView target_batch =
          assemble_batch(target_train, draw_rows(batch, target_train.size(), rng));

      // Feature extraction only; neither encoder is trained here.
      const Matrix source_feat = forward_eval(result.source_encoder, source_batch.features);
      const Matrix target_feat = forward_eval(result.target_encoder, target_batch.features);

      Matrix both(2 * batch, source_feat.cols());
      std::copy(source_feat.storage().begin(), source_feat.storage().end(),
                both.data());
      std::copy(target_feat.storage().begin(), target_feat.storage().end(),
                both.data() + source_feat.size());

      ForwardCache disc_cache;
      const Matrix disc_logits =
          forward(result.discriminator, both, /*training=*/true, rng, &disc_cache);
      const BatchLossResult disc_loss = bce_with_logits(disc_logits, disc_labels);
      if (!std::isfinite(disc_loss.value)) {
        throw NumericError("discriminator loss non-finite at step " +
                           std::to_string(step));
      }
      const BackwardResult disc_grads =
          backward(result.discriminator, disc_cache, disc_loss.dloss_dlogits);
      adam_step(result.discriminator, disc_grads.grads, adam_disc);

      std::size_t correct = 0;
      for (std::size_t i = 0; i < disc_labels.size(); ++i) {
        correct += (disc_logits(i, 0) > 0.0) == (disc_labels[i] == 1) ? 1 : 0;
      }
      record.disc_loss = disc_loss.value;
      record.disc_accuracy =
          static_cast<double>(correct) / static_cast<double>(disc_labels.size());
    }

    // Generator step: target encoder fools the discriminator via the
    // inverted label; discriminator parameters are not updated.
    const BatchView target_batch =
        assemble_batch(target_train, draw_rows(batch, target_train.size(), rng));
    ForwardCache gen_cache, disc_cache;
    const Matrix target_feat = forward(result.target_encoder, target_batch.features,
                                       /*training=*/true, rng, &gen_cache);
    const Matrix disc_logits =
        forward(result.discriminator, target_feat, /*training=*/true, rng, &disc_cache);
    const BatchLossResult gen_loss = bce_with_logits(disc_logits, inverted_labels);
    if (!std::isfinite(gen_loss.value)) {
      throw NumericError("generator loss non-finite at step " + std::to_string(step));
    }
    const BackwardResult through_disc =
        backward(result.discriminator, disc_cache, gen_loss.dloss_dlogits);
    const BackwardResult gen_grads =
        backward(result.target_encoder, gen_cache, through_disc.input_grad);
    adam_step(result.target_encoder, gen_grads.grads, adam_gen);
    record.gen_loss = gen_loss.value;

    result.history.push_back(record);
  }
  return result;
}

TransferAccuracy evaluate_transfer(const DomainSplit& split, const MlpModel& encoder,
                                   const MlpModel& classifier, int k) {
  const int num_classes = static_cast<int>(classifier.config.output_dim);
  if (k < 1 || k >= num_classes) {
    throw ValidationError("evaluate_transfer requires 1 <= k < num_classes");
  }
  const MlpModel* chain[] = {&encoder, &classifier};
  const std::span<const MlpModel* const> pipeline(chain);

  TransferAccuracy acc;
  acc.source_accuracy =
      topk_accuracy(pipeline, split_train_validation(split.source).validation, k);
  acc.target_accuracy =
      topk_accuracy(pipeline, split_train_validation(split.target).validation, k);
  return acc;
}

MlpModel finetune_classifier_on_target(const MlpModel& target_encoder,
                                       const MlpModel& classifier,
                                       const DomainSplit& split,
                                       const TrainConfig& train_config) {
  train_config.validate();
  const DatasetManifest target_train = split_train_validation(split.target).train;
  if (target_train.empty()) {
    throw ValidationError("target train split is empty");
  }

  Rng rng(train_config.seed);
  MlpModel tuned = classifier;
  AdamState adam = AdamState::for_model(tuned, train_config.learning_rate);

  std::vector<std::size_t> order(target_train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(train_config.batch_size)) {
      const std::size_t size =
          std::min<std::size_t>(train_config.batch_size, order.size() - start);
      std::vector<std::size_t> rows(order.begin() + start, order.begin() + start + size);
      const BatchView batch = assemble_batch(target_train, rows);

      // Encoder is frozen: plain evaluation-mode feature extraction.
      const Matrix latent = forward_eval(target_encoder, batch.features);
      ForwardCache cache;
      const Matrix logits = forward(tuned, latent, /*training=*/true, rng, &cache);
      const BatchLossResult loss = nll_loss(logits, batch.labels);
      const BackwardResult grads = backward(tuned, cache, loss.dloss_dlogits);
      adam_step(tuned, grads.grads, adam);
    }
  }
  return tuned;
}

std::string adversarial_history_to_csv(const std::vector<AdversarialStep>& history) {
  std::string out = "step,disc_loss,gen_loss,disc_acc\n";
  for (const AdversarialStep& s : history) {
    out += std::to_string(s.step);
    out += ',' + format_double(s.disc_loss);
    out += ',' + format_double(s.gen_loss);
    out += ',' + format_double(s.disc_accuracy);
    out += '\n';
  }
  return out;
}

void write_adversarial_history(const std::vector<AdversarialStep>& history,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write history '" + path.string() + "'");
  out << adversarial_history_to_csv(history);
  if (!out) throw IoError("failed writing history '" + path.string() + "'");
}

}  // namespace geofair
