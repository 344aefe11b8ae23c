#include "geofair/trainer.hpp"

#include <algorithm>
#include <numeric>

#include "geofair/evaluation.hpp"
#include "geofair/format.hpp"
#include "geofair/rng.hpp"

namespace geofair {

std::string_view train_method_name(TrainMethod method) {
  switch (method) {
    case TrainMethod::Baseline: return "baseline";
    case TrainMethod::Weighted: return "weighted";
    case TrainMethod::Sampled: return "sampled";
    case TrainMethod::Focal: return "focal";
  }
  return "?";
}

std::optional<TrainMethod> train_method_from_name(std::string_view name) {
  if (name == "baseline") return TrainMethod::Baseline;
  if (name == "weighted") return TrainMethod::Weighted;
  if (name == "sampled") return TrainMethod::Sampled;
  if (name == "focal") return TrainMethod::Focal;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (batch_size <= 0) throw ValidationError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(focal_gamma >= 0.0)) throw ValidationError("focal_gamma must be >= 0");
  if (topk < 1) throw ValidationError("topk must be >= 1");
}

BatchView assemble_batch(const DatasetManifest& manifest,
                         const std::vector<std::size_t>& rows) {
  BatchView view;
  view.features = Matrix(rows.size(), manifest.feature_dim);
  view.labels.resize(rows.size());
  view.incomes.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Sample& s = manifest.samples[rows[i]];
    std::copy(s.features.begin(), s.features.end(),
              view.features.data() + i * view.features.cols());
    view.labels[i] = s.label;
    view.incomes[i] = s.income;
  }
  return view;
}

TrainResult train_classifier(const DatasetManifest& train,
                             const DatasetManifest& validation,
                             const MlpConfig& architecture, TrainMethod method,
                             const TrainConfig& config) {
  config.validate();
  train.validate();
  if (architecture.input_dim != static_cast<std::size_t>(train.feature_dim)) {
    throw ShapeError("architecture input_dim does not match manifest feature_dim");
  }
  if (architecture.output_dim < static_cast<std::size_t>(train.num_classes)) {
    throw ValidationError("architecture output_dim smaller than class count");
  }

  Rng rng(config.seed);
  TrainResult result;
  result.model = initialize_mlp(architecture, rng);
  AdamState adam = AdamState::for_model(result.model, config.learning_rate);
  const FocalConfig focal{config.focal_gamma};

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  const int k = std::min(config.topk, static_cast<int>(architecture.output_dim) - 1);

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

      ForwardCache cache;
      const Matrix logits =
          forward(result.model, batch.features, /*training=*/true, rng, &cache);

      BatchLossResult loss;
      switch (method) {
        case TrainMethod::Weighted:
          loss = weighted_batch_loss(logits, batch.labels, batch.incomes);
          break;
        case TrainMethod::Focal:
          loss = focal_loss(logits, batch.labels, focal);
          break;
        case TrainMethod::Baseline:
        case TrainMethod::Sampled:
          loss = nll_loss(logits, batch.labels);
          break;
      }

      const BackwardResult grads = backward(result.model, cache, loss.dloss_dlogits);
      adam_step(result.model, grads.grads, adam);
      loss_sum += loss.value;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.mean_loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
    stats.train_accuracy = k >= 1 ? topk_accuracy(result.model, train, k) : 0.0;
    stats.val_accuracy =
        (!validation.empty() && k >= 1) ? topk_accuracy(result.model, validation, k) : 0.0;
    result.log.push_back(stats);
  }
  return result;
}

std::string train_log_to_csv(const std::vector<EpochStats>& log) {
  std::string out = "epoch,mean_loss,train_accuracy,val_accuracy\n";
  for (const EpochStats& s : log) {
    out += std::to_string(s.epoch);
    out += ',' + format_double(s.mean_loss);
    out += ',' + format_double(s.train_accuracy);
    out += ',' + format_double(s.val_accuracy);
    out += '\n';
  }
  return out;
}

}  // namespace geofair
