#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geofair/evaluation.hpp"
#include "geofair/format.hpp"
#include "geofair/synthetic.hpp"
#include "test_util.hpp"

using namespace geofair;
using test_util::random_batch;
using test_util::random_labels;

namespace {

/// Sort-based top-k oracle: stable sort by (logit desc, index asc), hit iff
/// the true label sits in the first k slots.
bool sort_oracle_hit(const Matrix& logits, std::size_t row, int label, int k) {
  std::vector<int> order(logits.cols());
  for (std::size_t j = 0; j < logits.cols(); ++j) order[j] = static_cast<int>(j);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (logits(row, a) != logits(row, b)) return logits(row, a) > logits(row, b);
    return a < b;
  });
  return std::find(order.begin(), order.begin() + k, label) != order.begin() + k;
}

/// Perfect-classification fixture: features are a scaled one-hot of the
/// label and the model is a fixed identity map.
struct PerfectFixture {
  DatasetManifest manifest;
  MlpModel model;
};

PerfectFixture perfect_fixture(int classes, int samples, Rng& rng) {
  PerfectFixture fx;
  fx.manifest.num_classes = classes;
  fx.manifest.feature_dim = classes;
  for (int i = 0; i < samples; ++i) {
    Sample s;
    s.id = "p" + std::to_string(i);
    s.label = static_cast<int>(rng.uniform_index(classes));
    s.income = rng.uniform(100.0, 6000.0);
    s.features.assign(classes, 0.0);
    s.features[s.label] = 10.0;
    fx.manifest.samples.push_back(std::move(s));
  }
  fx.model.config.input_dim = classes;
  fx.model.config.hidden_dims = {};
  fx.model.config.output_dim = classes;
  fx.model.config.dropout_prob = 0.0;
  Matrix identity(classes, classes, 0.0);
  for (int i = 0; i < classes; ++i) identity(i, i) = 1.0;
  fx.model.weights = {identity};
  fx.model.biases = {std::vector<double>(classes, 0.0)};
  return fx;
}

}  // namespace

TEST_CASE("topk_hits: basic hits and deterministic tie-break") {
  Matrix logits(1, 2);
  logits(0, 0) = 0.1;
  logits(0, 1) = 0.9;
  CHECK(topk_hits(logits, {1}, 1) == std::vector<std::uint8_t>{1});
  CHECK(topk_hits(logits, {0}, 1) == std::vector<std::uint8_t>{0});

  const Matrix equal(1, 4, 3.0);
  CHECK(topk_hits(equal, {0}, 1) == std::vector<std::uint8_t>{1});  // index tie-break
  CHECK(topk_hits(equal, {1}, 1) == std::vector<std::uint8_t>{0});
  CHECK(topk_hits(equal, {2}, 3) == std::vector<std::uint8_t>{1});
  CHECK(topk_hits(equal, {3}, 3) == std::vector<std::uint8_t>{0});
}

TEST_CASE("topk_hits: uniform logits at k = K-1 miss only the last class") {
  const int classes = 6;
  const Matrix logits(classes, classes, 0.0);
  std::vector<int> labels(classes);
  for (int i = 0; i < classes; ++i) labels[i] = i;
  const auto hits = topk_hits(logits, labels, classes - 1);
  std::size_t total = 0;
  for (auto h : hits) total += h;
  CHECK(total == static_cast<std::size_t>(classes - 1));
  CHECK(hits.back() == 0);
}

TEST_CASE("topk_hits: agrees with the sort oracle on 1000 seeded cases") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const int classes = 3 + static_cast<int>(rng.uniform_index(6));
    Matrix logits = random_batch(1, classes, rng);
    if (trial % 3 == 0) {
      // Force ties to exercise the tie-break path.
      logits(0, 0) = logits(0, classes - 1);
      if (classes > 2) logits(0, 1) = logits(0, 0);
    }
    const int label = static_cast<int>(rng.uniform_index(classes));
    const int k = 1 + static_cast<int>(rng.uniform_index(classes - 1));
    const auto hits = topk_hits(logits, {label}, k);
    CHECK(hits[0] == (sort_oracle_hit(logits, 0, label, k) ? 1 : 0));
  }
}

TEST_CASE("topk_hits: k out of range is rejected") {
  const Matrix logits(1, 4, 0.0);
  CHECK_THROWS_AS(topk_hits(logits, {0}, 0), ValidationError);
  CHECK_THROWS_AS(topk_hits(logits, {0}, 4), ValidationError);
  CHECK_THROWS_AS(topk_hits(logits, {0}, 7), ValidationError);
}

TEST_CASE("binned_accuracy: per-bin ratios and ordering") {
  std::vector<Sample> samples;
  std::vector<std::uint8_t> hits;
  auto add = [&](double income, bool hit) {
    Sample s;
    s.id = "x" + std::to_string(samples.size());
    s.income = income;
    samples.push_back(std::move(s));
    hits.push_back(hit ? 1 : 0);
  };
  add(450.0, true);
  add(500.0, true);
  add(520.0, false);
  add(1000.0, true);

  const auto records = binned_accuracy(samples, hits, 300.0);
  REQUIRE(records.size() == 2);
  CHECK(records[0].bin_lower == 300.0);
  CHECK(records[0].bin_upper == 600.0);
  CHECK(records[0].count == 3);
  CHECK(records[0].accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(records[1].bin_lower == 900.0);
  CHECK(records[1].count == 1);
  CHECK(records[1].accuracy == 1.0);

  CHECK(binned_accuracy({}, {}, 300.0).empty());
}

TEST_CASE("moving_average_curve: partial windows and constancy") {
  std::vector<BinRecord> records(2);
  records[0].accuracy = 0.5;
  records[1].accuracy = 0.7;
  const auto curve = moving_average_curve(records, 10);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0] == doctest::Approx(0.5));
  CHECK(curve[1] == doctest::Approx(0.6));

  std::vector<BinRecord> constant(8);
  for (auto& r : constant) r.accuracy = 0.42;
  for (double v : moving_average_curve(constant, 3)) CHECK(v == doctest::Approx(0.42));

  CHECK_THROWS_AS(moving_average_curve(records, 0), ValidationError);
}

TEST_CASE("moving_average_curve: matches the brute-force oracle exactly") {
  Rng rng(32);
  std::vector<BinRecord> records(15);
  for (auto& r : records) r.accuracy = rng.uniform();

  const int window = 10;
  const auto curve = moving_average_curve(records, window);
  for (std::size_t j = 0; j < records.size(); ++j) {
    const std::size_t start = j + 1 >= static_cast<std::size_t>(window) ? j + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t i = start; i <= j; ++i) sum += records[i].accuracy;
    const double expected = sum / static_cast<double>(j - start + 1);
    CHECK(curve[j] == expected);  // exact, same arithmetic
  }
}

TEST_CASE("moving_average_curve: smoothed values stay inside the raw range") {
  Rng rng(33);
  std::vector<BinRecord> records(25);
  for (auto& r : records) r.accuracy = rng.uniform();
  double lo = 1.0, hi = 0.0;
  for (const auto& r : records) {
    lo = std::min(lo, r.accuracy);
    hi = std::max(hi, r.accuracy);
  }
  for (double v : moving_average_curve(records, 10)) {
    CHECK(v >= lo - 1e-15);
    CHECK(v <= hi + 1e-15);
  }
}

TEST_CASE("continent_accuracy: grouping, ordering, unknown bucket") {
  std::vector<Sample> samples(5);
  samples[0].continent = Continent::Europe;
  samples[1].continent = Continent::Europe;
  samples[2].continent = Continent::Africa;
  samples[3].continent = Continent::Africa;
  // samples[4] has no continent
  const std::vector<std::uint8_t> hits = {1, 0, 1, 1, 0};

  const auto records = continent_accuracy(samples, hits);
  REQUIRE(records.size() == 3);
  CHECK(records[0].continent == Continent::Europe);  // income order: Europe > Africa
  CHECK(records[0].count == 2);
  CHECK(records[0].accuracy == doctest::Approx(0.5));
  CHECK(records[1].continent == Continent::Africa);
  CHECK(records[1].accuracy == doctest::Approx(1.0));
  CHECK_FALSE(records[2].continent.has_value());
  CHECK(records[2].count == 1);

  std::size_t total = 0;
  for (const auto& r : records) total += r.count;
  CHECK(total == samples.size());
}

TEST_CASE("continent_accuracy: single continent, all hits") {
  std::vector<Sample> samples(3);
  for (auto& s : samples) s.continent = Continent::Europe;
  const auto records = continent_accuracy(samples, {1, 1, 1});
  REQUIRE(records.size() == 1);
  CHECK(records[0].continent == Continent::Europe);
  CHECK(records[0].accuracy == 1.0);
}

TEST_CASE("build_report: perfect classifier has zero disparity") {
  Rng rng(34);
  auto fx = perfect_fixture(4, 400, rng);
  const FairnessReport report = build_report(fx.model, fx.manifest, 1, 300.0, 10);
  CHECK(report.overall_topk == 1.0);
  CHECK(report.accuracy_range == 0.0);
  CHECK(report.low_high_gap == 0.0);
  for (const auto& bin : report.per_bin) CHECK(bin.accuracy == 1.0);
}

TEST_CASE("build_report: per-bin counts add up and reports are repeatable") {
  SynthConfig config;
  config.num_classes = 5;
  config.feature_dim = 6;
  config.samples_per_run = 1500;
  config.shift_strength = 1.0;
  config.imbalance_exponent = 0.5;
  config.seed = 35;
  const DatasetManifest manifest = generate_synthetic(config);

  Rng rng(36);
  MlpConfig arch;
  arch.input_dim = 6;
  arch.hidden_dims = {16};
  arch.output_dim = 5;
  arch.dropout_prob = 0.0;
  const MlpModel model = initialize_mlp(arch, rng);

  const FairnessReport a = build_report(model, manifest, 2, 300.0, 10);
  const FairnessReport b = build_report(model, manifest, 2, 300.0, 10);
  CHECK(report_to_json(a) == report_to_json(b));
  CHECK(curve_to_csv(a) == curve_to_csv(b));
  CHECK(curve_to_svg(a) == curve_to_svg(b));

  std::size_t bin_total = 0;
  for (const auto& bin : a.per_bin) bin_total += bin.count;
  CHECK(bin_total == a.num_samples);
  std::size_t continent_total = 0;
  for (const auto& r : a.per_continent) continent_total += r.count;
  CHECK(continent_total == a.num_samples);

  // accuracy_range is max - min of the smoothed curve.
  const auto [lo, hi] = std::minmax_element(a.moving_avg.begin(), a.moving_avg.end());
  CHECK(a.accuracy_range == *hi - *lo);
}

TEST_CASE("build_report: invariant under sample reordering") {
  SynthConfig config;
  config.num_classes = 4;
  config.feature_dim = 5;
  config.samples_per_run = 800;
  config.shift_strength = 1.0;
  config.seed = 37;
  const DatasetManifest manifest = generate_synthetic(config);

  Rng rng(38);
  MlpConfig arch;
  arch.input_dim = 5;
  arch.hidden_dims = {12};
  arch.output_dim = 4;
  arch.dropout_prob = 0.0;
  const MlpModel model = initialize_mlp(arch, rng);

  DatasetManifest shuffled = manifest;
  Rng shuffle_rng(39);
  shuffle_rng.shuffle(shuffled.samples);

  const FairnessReport a = build_report(model, manifest, 1, 300.0, 10);
  const FairnessReport b = build_report(model, shuffled, 1, 300.0, 10);
  CHECK(a.accuracy_range == doctest::Approx(b.accuracy_range).epsilon(1e-15));
  CHECK(a.low_high_gap == doctest::Approx(b.low_high_gap).epsilon(1e-15));
  CHECK(a.overall_topk == doctest::Approx(b.overall_topk).epsilon(1e-15));
}

TEST_CASE("build_report: fields revalidate from the emitted curve CSV") {
  SynthConfig config;
  config.num_classes = 5;
  config.feature_dim = 6;
  config.samples_per_run = 2000;
  config.shift_strength = 1.5;
  config.seed = 40;
  const DatasetManifest manifest = generate_synthetic(config);

  Rng rng(41);
  MlpConfig arch;
  arch.input_dim = 6;
  arch.hidden_dims = {16};
  arch.output_dim = 5;
  arch.dropout_prob = 0.0;
  const MlpModel model = initialize_mlp(arch, rng);
  const FairnessReport report = build_report(model, manifest, 1, 300.0, 10);

  // Re-read the CSV and recompute every derived quantity from raw columns.
  std::istringstream csv(curve_to_csv(report));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "bin_lower,bin_upper,n,accuracy,moving_avg");

  std::vector<double> accuracy, moving s;
  std::vector<std::size_t> counts;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 5);
    counts.push_back(static_cast<std::size_t>(std::stoull(fields[2])));
    accuracy.push_back(std::stod(fields[3]));
    movings.push_back(std::stod(fields[4]));
  }
  REQUIRE(accuracy.size() == report.per_bin.size());

  // Moving average recomputed from the raw accuracies.
  for (std::size_t j = 0; j < accuracy.size(); ++j) {
    const std::size_t start = j + 1 >= 10 ? j + 1 - 10 : 0;
    double sum = 0.0;
    for (std::size_t i = start; i <= j; ++i) sum += accuracy[i];
    CHECK(movings[j] == doctest::Approx(sum / (j - start + 1)).epsilon(1e-12));
  }

  // Disparity summaries recomputed from the smoothed curve.
  const auto [lo, hi] = std::minmax_element(movings.begin(), movings.end());
  CHECK(report.accuracy_range == doctest::Approx(*hi - *lo).epsilon(1e-12));
  const std::size_t half = movings.size() / 2;
  double low = 0.0, high = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    low += movings[i];
    high += movings[movings.size() - half + i];
  }
  CHECK(report.low_high_gap == doctest::Approx((high - low) / half).epsilon(1e-12));

  std::size_t total = 0;
  for (auto c : counts) total += c;
  CHECK(total == report.num_samples);
}
