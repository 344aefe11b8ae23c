// geofair: seeded fairness experiments for income/geography-biased
// classification. Subcommands: generate, ingest, train, adapt, report.
// One experiment = one JSON config file; command-line flags override
// individual keys. Exit codes: 0 ok, 1 validation/config, 2 I/O, 3 numeric.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "geofair/adaptation.hpp"
#include "geofair/binning.hpp"
#include "geofair/checkpoint.hpp"
#include "geofair/dataset.hpp"
#include "geofair/evaluation.hpp"
#include "geofair/format.hpp"
#include "geofair/geo.hpp"
#include "geofair/synthetic.hpp"
#include "geofair/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct AddaSection {
  int adversarial_steps = 400;
  int disc_steps_per_gen_step = 1;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double split_income = 600.0;
  bool finetune = true;
  int source_epochs = 5;
  int finetune_epochs = 3;
  std::vector<std::size_t> encoder_hidden = {256};
  std::size_t encoder_output_dim = 64;
  double encoder_dropout = 0.0;
  std::vector<std::size_t> classifier_hidden = {256};
  double classifier_dropout = 0.3;
  std::size_t discriminator_hidden = 256;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string method = "baseline";
  std::optional<double> focal_gamma;
  std::optional<int> sampling_threshold;
  int batch_size = 128;
  double learning_rate = 1e-3;
  int epochs = 5;
  double bin_width = 300.0;
  int topk = 5;
  int window = 10;

  std::vector<std::size_t> hidden_dims = {256, 256};
  double dropout_prob = 0.3;

  std::string manifest_path;
  std::string output_dir;
  std::string checkpoint_path;
  std::string encoder_path;

  geofair::SynthConfig synth;
  AddaSection adda;
};

void require_keys(const json& object, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw geofair::ValidationError("unknown config key '" + key + "' in " + where);
    }
  }
}

std::vector<std::size_t> read_dims(const json& value, const char* what) {
  std::vector<std::size_t> dims;
  if (!value.is_array()) {
    throw geofair::ValidationError(std::string(what) + " must be an array of widths");
  }
  for (const auto& v : value) dims.push_back(v.get<std::size_t>());
  return dims;
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig config;
  if (path.empty()) return config;

  std::ifstream in(path);
  if (!in) throw geofair::IoError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw geofair::ValidationError("config '" + path + "': " + e.what());
  }

  require_keys(doc,
               {"seed", "method", "focal_gamma", "sampling_threshold", "batch_size",
                "learning_rate", "epochs", "bin_width", "topk", "window", "model",
                "paths", "synth", "adda"},
               "top level");

  if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("method")) config.method = doc["method"].get<std::string>();
  if (doc.contains("focal_gamma")) config.focal_gamma = doc["focal_gamma"].get<double>();
  if (doc.contains("sampling_threshold")) {
    config.sampling_threshold = doc["sampling_threshold"].get<int>();
  }
  if (doc.contains("batch_size")) config.batch_size = doc["batch_size"].get<int>();
  if (doc.contains("learning_rate")) config.learning_rate = doc["learning_rate"].get<double>();
  if (doc.contains("epochs")) config.epochs = doc["epochs"].get<int>();
  if (doc.contains("bin_width")) config.bin_width = doc["bin_width"].get<double>();
  if (doc.contains("topk")) config.topk = doc["topk"].get<int>();
  if (doc.contains("window")) config.window = doc["window"].get<int>();

  if (doc.contains("model")) {
    const json& model = doc["model"];
    require_keys(model, {"hidden_dims", "dropout_prob"}, "model");
    if (model.contains("hidden_dims")) {
      config.hidden_dims = read_dims(model["hidden_dims"], "model.hidden_dims");
    }
    if (model.contains("dropout_prob")) {
      config.dropout_prob = model["dropout_prob"].get<double>();
    }
  }

  if (doc.contains("paths")) {
    const json& paths = doc["paths"];
    require_keys(paths, {"manifest", "output_dir", "checkpoint", "encoder"}, "paths");
    if (paths.contains("manifest")) config.manifest_path = paths["manifest"].get<std::string>();
    if (paths.contains("output_dir")) config.output_dir = paths["output_dir"].get<std::string>();
    if (paths.contains("checkpoint")) config.checkpoint_path = paths["checkpoint"].get<std::string>();
    if (paths.contains("encoder")) config.encoder_path = paths["encoder"].get<std::string>();
  }

  if (doc.contains("synth")) {
    const json& synth = doc["synth"];
    require_keys(synth,
                 {"num_classes", "feature_dim", "samples_per_run", "income_min",
                  "income_max", "shift_strength", "imbalance_exponent"},
                 "synth");
    auto& s = config.synth;
    if (synth.contains("num_classes")) s.num_classes = synth["num_classes"].get<int>();
    if (synth.contains("feature_dim")) s.feature_dim = synth["feature_dim"].get<int>();
    if (synth.contains("samples_per_run")) s.samples_per_run = synth["samples_per_run"].get<int>();
    if (synth.contains("income_min")) s.income_min = synth["income_min"].get<double>();
    if (synth.contains("income_max")) s.income_max = synth["income_max"].get<double>();
    if (synth.contains("shift_strength")) s.shift_strength = synth["shift_strength"].get<double>();
    if (synth.contains("imbalance_exponent")) {
      s.imbalance_exponent = synth["imbalance_exponent"].get<double>();
    }
  }

  if (doc.contains("adda")) {
    const json& adda = doc["adda"];
    require_keys(adda,
                 {"adversarial_steps", "disc_steps_per_gen_step", "batch_size",
                  "learning_rate", "split_income", "finetune", "source_epochs",
                  "finetune_epochs", "encoder_hidden", "encoder_output_dim",
                  "encoder_dropout", "classifier_hidden", "classifier_dropout",
                  "discriminator_hidden"},
                 "adda");
    auto& a = config.adda;
    if (adda.contains("adversarial_steps")) a.adversarial_steps = adda["adversarial_steps"].get<int>();
    if (adda.contains("disc_steps_per_gen_step")) {
      a.disc_steps_per_gen_step = adda["disc_steps_per_gen_step"].get<int>();
    }
    if (adda.contains("batch_size")) a.batch_size = adda["batch_size"].get<int>();
    if (adda.contains("learning_rate")) a.learning_rate = adda["learning_rate"].get<double>();
    if (adda.contains("split_income")) a.split_income = adda["split_income"].get<double>();
    if (adda.contains("finetune")) a.finetune = adda["finetune"].get<bool>();
    if (adda.contains("source_epochs")) a.source_epochs = adda["source_epochs"].get<int>();
    if (adda.contains("finetune_epochs")) a.finetune_epochs = adda["finetune_epochs"].get<int>();
    if (adda.contains("encoder_hidden")) {
      a.encoder_hidden = read_dims(adda["encoder_hidden"], "adda.encoder_hidden");
    }
    if (adda.contains("encoder_output_dim")) {
      a.encoder_output_dim = adda["encoder_output_dim"].get<std::size_t>();
    }
    if (adda.contains("encoder_dropout")) a.encoder_dropout = adda["encoder_dropout"].get<double>();
    if (adda.contains("classifier_hidden")) {
      a.classifier_hidden = read_dims(adda["classifier_hidden"], "adda.classifier_hidden");
    }
    if (adda.contains("classifier_dropout")) {
      a.classifier_dropout = adda["classifier_dropout"].get<double>();
    }
    if (adda.contains("discriminator_hidden")) {
      a.discriminator_hidden = adda["discriminator_hidden"].get<std::size_t>();
    }
  }
  return config;
}

/// Full fail-fast validation; no compute may start before this passes.
void validate_config(const ExperimentConfig& config, bool needs_manifest) {
  if (!geofair::train_method_from_name(config.method)) {
    throw geofair::ValidationError("unknown method '" + config.method +
                                   "' (baseline|weighted|sampled|focal)");
  }
  if (config.focal_gamma && config.method != "focal") {
    throw geofair::ValidationError("focal_gamma is only valid with method=focal");
  }
  if (config.sampling_threshold && config.method != "sampled") {
    throw geofair::ValidationError("sampling_threshold is only valid with method=sampled");
  }
  if (config.focal_gamma && !(*config.focal_gamma >= 0.0)) {
    throw geofair::ValidationError("focal_gamma must be >= 0");
  }
  if (config.sampling_threshold && *config.sampling_threshold < 1) {
    throw geofair::ValidationError("sampling_threshold must be >= 1");
  }
  if (config.batch_size <= 0) throw geofair::ValidationError("batch_size must be positive");
  if (config.epochs < 0) throw geofair::ValidationError("epochs must be >= 0");
  if (!(config.learning_rate > 0.0)) {
    throw geofair::ValidationError("learning_rate must be positive");
  }
  if (!(config.bin_width > 0.0)) throw geofair::ValidationError("bin_width must be positive");
  if (config.topk < 1) throw geofair::ValidationError("topk must be >= 1");
  if (config.window < 1) throw geofair::ValidationError("window must be >= 1");
  for (std::size_t h : config.hidden_dims) {
    if (h == 0) throw geofair::ValidationError("model.hidden_dims entries must be positive");
  }
  if (!(config.dropout_prob >= 0.0 && config.dropout_prob < 1.0)) {
    throw geofair::ValidationError("model.dropout_prob must lie in [0, 1)");
  }
  if (needs_manifest && config.manifest_path.empty()) {
    throw geofair::ValidationError("no manifest path (config paths.manifest or --manifest)");
  }
}

fs::path output_dir(const ExperimentConfig& config) {
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* env = std::getenv("GEOFAIR_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw geofair::IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw geofair::IoError("failed writing '" + path.string() + "'");
}

geofair::MlpConfig classifier_architecture(const ExperimentConfig& config,
                                           const geofair::DatasetManifest& manifest) {
  geofair::MlpConfig arch;
  arch.input_dim = static_cast<std::size_t>(manifest.feature_dim);
  arch.hidden_dims = config.hidden_dims;
  arch.output_dim = static_cast<std::size_t>(manifest.num_classes);
  arch.dropout_prob = config.dropout_prob;
  return arch;
}

geofair::AddaConfig adda_config(const ExperimentConfig& config,
                                const geofair::DatasetManifest& manifest) {
  const AddaSection& a = config.adda;
  geofair::AddaConfig adda;
  adda.encoder_config.input_dim = static_cast<std::size_t>(manifest.feature_dim);
  adda.encoder_config.hidden_dims = a.encoder_hidden;
  adda.encoder_config.output_dim = a.encoder_output_dim;
  adda.encoder_config.dropout_prob = a.encoder_dropout;
  adda.classifier_config.input_dim = a.encoder_output_dim;
  adda.classifier_config.hidden_dims = a.classifier_hidden;
  adda.classifier_config.output_dim = static_cast<std::size_t>(manifest.num_classes);
  adda.classifier_config.dropout_prob = a.classifier_dropout;
  adda.discriminator_config = geofair::AddaConfig::default_discriminator(a.encoder_output_dim);
  adda.discriminator_config.hidden_dims = {a.discriminator_hidden, a.discriminator_hidden};
  adda.adversarial_steps = a.adversarial_steps;
  adda.disc_steps_per_gen_step = a.disc_steps_per_gen_step;
  adda.batch_size = a.batch_size;
  adda.learning_rate = a.learning_rate;
  adda.seed = config.seed;
  return adda;
}

int cmd_generate(const ExperimentConfig& config) {
  validate_config(config, /*needs_manifest=*/true);
  geofair::SynthConfig synth = config.synth;
  synth.seed = config.seed;
  synth.validate();

  const geofair::DatasetManifest manifest = geofair::generate_synthetic(synth);
  geofair::write_manifest(manifest, config.manifest_path);

  std::cout << "wrote " << manifest.size() << " samples to " << config.manifest_path
            << " (classes " << manifest.num_classes << ", feature_dim "
            << manifest.feature_dim << ", shift_strength "
            << geofair::format_double(synth.shift_strength) << ")\n";

  std::map<int, std::size_t> class_counts;
  for (const auto& s : manifest.samples) class_counts[s.label] += 1;
  std::cout << "per-class counts:\n";
  for (const auto& [label, count] : class_counts) {
    std::cout << "  class " << label << ": " << count << "\n";
  }

  const geofair::IncomeBinning binning = geofair::bin_by_income(manifest, config.bin_width);
  std::cout << "per-bin counts (width " << geofair::format_double(config.bin_width) << "):\n";
  for (const auto& [bin, rows] : binning.bins) {
    std::cout << "  [" << geofair::format_double(bin * config.bin_width) << ", "
              << geofair::format_double((bin + 1) * config.bin_width) << "): "
              << rows.size() << "\n";
  }
  return 0;
}

int cmd_ingest(const ExperimentConfig& config, bool resolve_continents,
               bool income_from_continent) {
  validate_config(config, /*needs_manifest=*/true);
  geofair::DatasetManifest manifest = geofair::ingest_manifest(config.manifest_path);

  std::size_t resolved = 0, reassigned = 0;
  if (resolve_continents) {
    for (auto& s : manifest.samples) {
      if (!s.continent && s.latitude && s.longitude) {
        s.continent = geofair::resolve_continent(*s.latitude, *s.longitude);
        ++resolved;
      }
    }
  }
  if (income_from_continent) {
    const auto& table = geofair::ContinentIncomeTable::standard();
    for (auto& s : manifest.samples) {
      if (s.continent) {
        s = geofair::assign_income_from_continent(std::move(s), table,
                                                  /*override_existing=*/true);
        ++reassigned;
      }
    }
  }
  manifest.validate();

  const fs::path out = output_dir(config) / "ingested_manifest.csv";
  geofair::write_manifest(manifest, out);

  std::cout << "ingested " << manifest.size() << " samples (" << manifest.num_classes
            << " classes, feature_dim " << manifest.feature_dim << ")\n";
  if (resolve_continents) std::cout << "resolved " << resolved << " continents\n";
  if (income_from_continent) {
    std::cout << "assigned income from continent for " << reassigned << " samples\n";
  }
  std::map<std::string, std::size_t> by_continent;
  for (const auto& s : manifest.samples) {
    by_continent[s.continent ? std::string(geofair::continent_name(*s.continent))
                             : std::string("unknown")] += 1;
  }
  for (const auto& [name, count] : by_continent) {
    std::cout << "  " << name << ": " << count << "\n";
  }
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_train(const ExperimentConfig& config) {
  validate_config(config, /*needs_manifest=*/true);
  const auto method = *geofair::train_method_from_name(config.method);

  const geofair::DatasetManifest manifest = geofair::ingest_manifest(config.manifest_path);
  geofair::TrainValSplit split = geofair::split_train_validation(manifest);

  const fs::path out = output_dir(config);
  if (method == geofair::TrainMethod::Sampled) {
    // Resampling applies to the training split only; validation must stay
    // untouched by design.
    const std::size_t threshold =
        static_cast<std::size_t>(config.sampling_threshold.value_or(5000));
    const auto binning = geofair::bin_by_income(split.train, config.bin_width);
    geofair::Rng rng(config.seed);
    split.train = geofair::resample_to_threshold(split.train, binning, threshold, rng);
    geofair::write_manifest(split.train, out / "resampled_manifest.csv");
    std::cout << "resampled training split to " << split.train.size()
              << " samples (threshold " << threshold << ")\n";
  }

  geofair::TrainConfig train_config;
  train_config.epochs = config.epochs;
  train_config.batch_size = config.batch_size;
  train_config.learning_rate = config.learning_rate;
  train_config.focal_gamma = config.focal_gamma.value_or(2.0);
  train_config.topk = config.topk;
  train_config.seed = config.seed;

  const geofair::MlpConfig arch = classifier_architecture(config, manifest);
  const geofair::TrainResult result =
      geofair::train_classifier(split.train, split.validation, arch, method, train_config);

  for (const auto& e : result.log) {
    std::cout << "epoch " << e.epoch << ": loss " << geofair::format_double(e.mean_loss)
              << ", train acc " << geofair::format_double(e.train_accuracy)
              << ", val acc " << geofair::format_double(e.val_accuracy) << "\n";
  }

  geofair::save_model(result.model, out / "model.ckpt");
  write_text(out / "train_log.csv", geofair::train_log_to_csv(result.log));
  std::cout << "wrote " << (out / "model.ckpt").string() << "\n";
  return 0;
}

int cmd_adapt(const ExperimentConfig& config) {
  validate_config(config, /*needs_manifest=*/true);
  const geofair::DatasetManifest manifest = geofair::ingest_manifest(config.manifest_path);
  const geofair::DomainSplit split =
      geofair::split_domains(manifest, config.adda.split_income);

  const geofair::AddaConfig adda = adda_config(config, manifest);
  adda.validate();

  geofair::TrainConfig source_config;
  source_config.epochs = config.adda.source_epochs;
  source_config.batch_size = config.adda.batch_size;
  source_config.learning_rate = config.adda.learning_rate;
  source_config.topk = config.topk;
  source_config.seed = config.seed;

  std::cout << "source training (" << split.source.size() << " source / "
            << split.target.size() << " target samples, split income "
            << geofair::format_double(split.split_income) << ")\n";
  const geofair::SourceTrainResult source = geofair::train_source(split, adda, source_config);

  const int k = std::min(config.topk, manifest.num_classes - 1);
  const geofair::TransferAccuracy before =
      geofair::evaluate_transfer(split, source.encoder, source.classifier, k);
  std::cout << "source encoder: source val acc " << geofair::format_double(before.source_accuracy)
            << ", target val acc " << geofair::format_double(before.target_accuracy) << "\n";

  geofair::Rng rng(config.seed + 1);
  geofair::AddaResult result = geofair::adapt_target(split, source.encoder, adda, rng);
  result.classifier = source.classifier;

  const fs::path out = output_dir(config);
  geofair::save_model(result.source_encoder, out / "source_encoder.ckpt");
  geofair::save_model(result.classifier, out / "source_classifier.ckpt");
  geofair::save_model(result.target_encoder, out / "target_encoder.ckpt");
  geofair::save_model(result.discriminator, out / "discriminator.ckpt");
  geofair::write_adversarial_history(result.history, out / "adda_history.csv");

  if (!result.history.empty()) {
    const auto& last = result.history.back();
    std::cout << "adversarial phase: " << result.history.size() << " steps, final disc acc "
              << geofair::format_double(last.disc_accuracy) << "\n";
  }

  if (config.adda.finetune) {
    geofair::TrainConfig finetune_config = source_config;
    finetune_config.epochs = config.adda.finetune_epochs;
    const geofair::MlpModel tuned = geofair::finetune_classifier_on_target(
        result.target_encoder, result.classifier, split, finetune_config);
    geofair::save_model(tuned, out / "classifier_finetuned.ckpt");

    const geofair::TransferAccuracy after =
        geofair::evaluate_transfer(split, result.target_encoder, tuned, k);
    std::cout << "adapted+finetuned: source val acc "
              << geofair::format_double(after.source_accuracy) << ", target val acc "
              << geofair::format_double(after.target_accuracy) << "\n";
  }
  std::cout << "wrote checkpoints and history to " << out.string() << "\n";
  return 0;
}

int cmd_report(const ExperimentConfig& config, bool svg, bool full_manifest) {
  validate_config(config, /*needs_manifest=*/true);
  if (config.checkpoint_path.empty()) {
    throw geofair::ValidationError("no checkpoint path (config paths.checkpoint or --checkpoint)");
  }

  const geofair::DatasetManifest manifest = geofair::ingest_manifest(config.manifest_path);
  const geofair::DatasetManifest eval_set =
      full_manifest ? manifest : geofair::split_train_validation(manifest).validation;

  const geofair::MlpModel model = geofair::load_model(config.checkpoint_path);
  std::optional<geofair::MlpModel> encoder;
  if (!config.encoder_path.empty()) encoder = geofair::load_model(config.encoder_path);

  const std::size_t expected_input =
      encoder ? encoder->config.input_dim : model.config.input_dim;
  if (expected_input != static_cast<std::size_t>(manifest.feature_dim)) {
    throw geofair::ShapeError("checkpoint expects input_dim " +
                              std::to_string(expected_input) + " but manifest has " +
                              std::to_string(manifest.feature_dim));
  }
  if (encoder && encoder->config.output_dim != model.config.input_dim) {
    throw geofair::ShapeError("encoder output_dim does not match classifier input_dim");
  }

  const int k = std::min(config.topk, manifest.num_classes - 1);
  geofair::FairnessReport report;
  if (encoder) {
    const geofair::MlpModel* chain[] = {&*encoder, &model};
    report = geofair::build_report(std::span<const geofair::MlpModel* const>(chain),
                                   eval_set, k, config.bin_width, config.window);
  } else {
    report = geofair::build_report(model, eval_set, k, config.bin_width, config.window);
  }

  const fs::path out = output_dir(config);
  write_text(out / "report.json", geofair::report_to_json(report));
  write_text(out / "curve.csv", geofair::curve_to_csv(report));
  if (svg) write_text(out / "curve.svg", geofair::curve_to_svg(report));

  std::cout << "evaluated " << report.num_samples << " samples, top-" << report.k
            << " accuracy " << geofair::format_double(report.overall_topk) << "\n";
  std::cout << "accuracy_range " << geofair::format_double(report.accuracy_range)
            << "\n";
  std::cout << "low_high_gap " << geofair::format_double(report.low_high_gap) << "\n";
  std::cout << "wrote " << (out / "report.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware classification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  ExperimentConfig flags;  // flag values; merged over the file config
  bool resolve_continents = false, income_from_continent = false;
  bool svg = false, full_manifest = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option("--seed", flags.seed, "Override: RNG seed");
    sub->add_option("--method", flags.method, "Override: baseline|weighted|sampled|focal");
    sub->add_option("--focal-gamma", flags.focal_gamma, "Override: focal loss gamma");
    sub->add_option("--sampling-threshold", flags.sampling_threshold,
                    "Override: per-bin resampling target");
    sub->add_option("--batch-size", flags.batch_size, "Override: minibatch size");
    sub->add_option("--learning-rate", flags.learning_rate, "Override: Adam learning rate");
    sub->add_option("--epochs", flags.epochs, "Override: training epochs");
    sub->add_option("--bin-width", flags.bin_width, "Override: income bin width");
    sub->add_option("--topk", flags.topk, "Override: k for top-k accuracy");
    sub->add_option("--manifest", flags.manifest_path, "Override: manifest CSV path");
    sub->add_option("--output-dir", flags.output_dir,
                    "Override: output directory (or $GEOFAIR_OUTPUT_DIR)");
  };

  CLI::App* generate = app.add_subcommand("generate", "Write a seeded synthetic manifest");
  add_common(generate);
  CLI::App* ingest = app.add_subcommand("ingest", "Validate and enrich a manifest");
  add_common(ingest);
  ingest->add_flag("--resolve-continents", resolve_continents,
                   "Fill missing continents from lat/lon");
  ingest->add_flag("--income-from-continent", income_from_continent,
                   "Overwrite incomes with the continent GDP table");
  CLI::App* train = app.add_subcommand("train", "Train a classifier under one method");
  add_common(train);
  CLI::App* adapt = app.add_subcommand("adapt", "Run the adversarial adaptation pipeline");
  add_common(adapt);
  CLI::App* report = app.add_subcommand("report", "Evaluate a checkpoint and emit the fairness report");
  add_common(report);
  report->add_option("--checkpoint", flags.checkpoint_path, "Model checkpoint to evaluate");
  report->add_option("--encoder", flags.encoder_path,
                     "Optional encoder checkpoint applied before the classifier");
  report->add_flag("--svg", svg, "Also emit curve.svg");
  report->add_flag("--full-manifest", full_manifest,
                   "Evaluate on the whole manifest instead of the validation split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    ExperimentConfig config = load_config(config_path);

    // Flags override file keys only when actually given on the command line.
    CLI::App* sub = app.get_subcommands().front();
    auto given = [&](const std::string& name) {
      return sub->count(name) > 0;
    };
    if (given("--seed")) config.seed = flags.seed;
    if (given("--method")) config.method = flags.method;
    if (given("--focal-gamma")) config.focal_gamma = flags.focal_gamma;
    if (given("--sampling-threshold")) config.sampling_threshold = flags.sampling_threshold;
    if (given("--batch-size")) config.batch_size = flags.batch_size;
    if (given("--learning-rate")) config.learning_rate = flags.learning_rate;
    if (given("--epochs")) config.epochs = flags.epochs;
    if (given("--bin-width")) config.bin_width = flags.bin_width;
    if (given("--topk")) config.topk = flags.topk;
    if (given("--manifest")) config.manifest_path = flags.manifest_path;
    if (given("--output-dir")) config.output_dir = flags.output_dir;
    if (sub == report) {
      if (given("--checkpoint")) config.checkpoint_path = flags.checkpoint_path;
      if (given("--encoder")) config.encoder_path = flags.encoder_path;
    }

    if (sub == generate) return cmd_generate(config);
    if (sub == ingest) return cmd_ingest(config, resolve_continents, income_from_continent);
    if (sub == train) return cmd_train(config);
    if (sub == adapt) return cmd_adapt(config);
    if (sub == report) return cmd_report(config, svg, full_manifest);
    throw geofair::ValidationError("no subcommand");
  } catch (const geofair::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const geofair::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const geofair::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
