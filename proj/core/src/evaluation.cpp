#include "geofair/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "geofair/format.hpp"
#include "geofair/geo.hpp"

namespace geofair {

std::vector<std::uint8_t> topk_hits(const Matrix& logits, const std::vector<int>& labels,
                                    int k) {
  const int num_classes = static_cast<int>(logits.cols());
  if (k < 1 || k >= num_classes) {
    throw ValidationError("top-k requires 1 <= k < num_classes, got k=" +
                          std::to_string(k) + " with " + std::to_string(num_classes) +
                          " classes");
  }
  if (labels.size() != logits.rows()) {
    throw ShapeError("labels length does not match logits rows");
  }

  std::vector<std::uint8_t> hits(logits.rows(), 0);
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const int t = labels[i];
    if (t < 0 || t >= num_classes) {
      throw ValidationError("label out of range at row " + std::to_string(i));
    }
    const double* row = logits.data() + i * logits.cols();
    const double target = row[t];
    // Rank of the true class: classes with a larger logit, plus equal-logit
    // classes with a smaller index, outrank it.
    int outranked_by = 0;
    for (int j = 0; j < num_classes; ++j) {
      if (row[j] > target || (row[j] == target && j < t)) ++outranked_by;
    }
    hits[i] = outranked_by < k ? 1 : 0;
  }
  return hits;
}

std::vector<BinRecord> binned_accuracy(const std::vector<Sample>& samples,
                                       const std::vector<std::uint8_t>& hits,
                                       double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("bin_width must be positive");
  if (samples.size() != hits.size()) {
    throw ShapeError("hits length does not match samples");
  }
  std::map<long long, std::pair<std::size_t, std::size_t>> counts;  // bin -> {n, hits}
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const long long bin =
        static_cast<long long>(std::floor(samples[i].income / bin_width));
    auto& entry = counts[bin];
    entry.first += 1;
    entry.second += hits[i];
  }
  std::vector<BinRecord> records;
  records.reserve(counts.size());
  for (const auto& [bin, entry] : counts) {
    BinRecord r;
    r.bin_lower = static_cast<double>(bin) * bin_width;
    r.bin_upper = r.bin_lower + bin_width;
    r.count = entry.first;
    r.accuracy = static_cast<double>(entry.second) / static_cast<double>(entry.first);
    records.push_back(r);
  }
  return records;
}

std::vector<double> moving_average_curve(const std::vector<BinRecord>& records,
                                         int window) {
  if (window < 1) throw ValidationError("moving average window must be >= 1");
  std::vector<double> curve(records.size(), 0.0);
  for (std::size_t j = 0; j < records.size(); ++j) {
    const std::size_t span = std::min<std::size_t>(j + 1, window);
    double sum = 0.0;
    for (std::size_t i = j + 1 - span; i <= j; ++i) sum += records[i].accuracy;
    curve[j] = sum / static_cast<double>(span);
  }
  return curve;
}

std::vector<ContinentRecord> continent_accuracy(const std::vector<Sample>& samples,
                                                const std::vector<std::uint8_t>& hits) {
  if (samples.size() != hits.size()) {
    throw ShapeError("hits length does not match samples");
  }
  std::array<std::pair<std::size_t, std::size_t>, 6> by_continent{};
  std::pair<std::size_t, std::size_t> unknown{0, 0};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto& entry = samples[i].continent
                      ? by_continent[static_cast<std::size_t>(*samples[i].continent)]
                      : unknown;
    entry.first += 1;
    entry.second += hits[i];
  }
  std::vector<ContinentRecord> records;
  for (Continent c : ContinentIncomeTable::by_income_descending()) {
    const auto& entry = by_continent[static_cast<std::size_t>(c)];
    if (entry.first == 0) continue;
    records.push_back({c, entry.first,
                       static_cast<double>(entry.second) / static_cast<double>(entry.first)});
  }
  if (unknown.first > 0) {
    records.push_back({std::nullopt, unknown.first,
                       static_cast<double>(unknown.second) /
                           static_cast<double>(unknown.first)});
  }
  return records;
}

Matrix forward_pipeline_eval(std::span<const MlpModel* const> pipeline,
                             const Matrix& batch) {
  if (pipeline.empty()) throw ValidationError("empty model pipeline");
  Matrix h = batch;
  for (const MlpModel* model : pipeline) h = forward_eval(*model, h);
  return h;
}

namespace {

/// Evaluation forwards run in fixed-size chunks; results are concatenated
/// in input order so the reduction is deterministic.
constexpr std::size_t kEvalChunk = 256;

std::vector<std::uint8_t> pipeline_hits(std::span<const MlpModel* const> pipeline,
                                        const DatasetManifest& manifest, int k) {
  manifest.validate();
  std::vector<std::uint8_t> hits;
  hits.reserve(manifest.size());
  for (std::size_t start = 0; start < manifest.size(); start += kEvalChunk) {
    const std::size_t rows = std::min(kEvalChunk, manifest.size() - start);
    Matrix batch(rows, manifest.feature_dim);
    std::vector<int> labels(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      const Sample& s = manifest.samples[start + i];
      std::copy(s.features.begin(), s.features.end(), batch.data() + i * batch.cols());
      labels[i] = s.label;
    }
    const Matrix logits = forward_pipeline_eval(pipeline, batch);
    const auto chunk_hits = topk_hits(logits, labels, k);
    hits.insert(hits.end(), chunk_hits.begin(), chunk_hits.end());
  }
  return hits;
}

}  // namespace

FairnessReport build_report(std::span<const MlpModel* const> pipeline,
                            const DatasetManifest& manifest, int k, double bin_width,
                            int window) {
  const auto hits = pipeline_hits(pipeline, manifest, k);

  FairnessReport report;
  report.k = k;
  report.bin_width = bin_width;
  report.window = window;
  report.num_samples = manifest.size();

  std::size_t total_hits = 0;
  for (auto h : hits) total_hits += h;
  report.overall_topk = static_cast<double>(total_hits) / static_cast<double>(hits.size());

  report.per_bin = binned_accuracy(manifest.samples, hits, bin_width);
  report.moving_avg = moving_average_curve(report.per_bin, window);
  report.per_continent = continent_accuracy(manifest.samples, hits);

  if (!report.moving_avg.empty()) {
    const auto [lo, hi] =
        std::minmax_element(report.moving_avg.begin(), report.moving_avg.end());
    report.accuracy_range = *hi - *lo;
  }
  // Gap between the upper- and lower-income halves of the smoothed curve;
  // the middle bin is left out when the count is odd.
  const std::size_t half = report.moving_avg.size() / 2;
  if (half > 0) {
    double low = 0.0, high = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      low += report.moving_avg[i];
      high += report.moving_avg[report.moving_avg.size() - half + i];
    }
    report.low_high_gap = (high - low) / static_cast<double>(half);
  }
  return report;
}

FairnessReport build_report(const MlpModel& model, const DatasetManifest& manifest,
                            int k, double bin_width, int window) {
  const MlpModel* chain[] = {&model};
  return build_report(std::span<const MlpModel* const>(chain), manifest, k, bin_width,
                      window);
}

double topk_accuracy(std::span<const MlpModel* const> pipeline,
                     const DatasetManifest& manifest, int k) {
  const auto hits = pipeline_hits(pipeline, manifest, k);
  std::size_t total = 0;
  for (auto h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(hits.size());
}

double topk_accuracy(const MlpModel& model, const DatasetManifest& manifest, int k) {
  const MlpModel* chain[] = {&model};
  return topk_accuracy(std::span<const MlpModel* const>(chain), manifest, k);
}

std::string report_to_json(const FairnessReport& report) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["k"] = report.k;
  doc["bin_width"] = report.bin_width;
  doc["window"] = report.window;
  doc["num_samples"] = report.num_samples;
  doc["overall_topk"] = report.overall_topk;
  doc["accuracy_range"] = report.accuracy_range;
  doc["low_high_gap"] = report.low_high_gap;
  doc["per_bin"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.per_bin.size(); ++i) {
    const BinRecord& r = report.per_bin[i];
    nlohmann::ordered_json row;
    row["bin_lower"] = r.bin_lower;
    row["bin_upper"] = r.bin_upper;
    row["count"] = r.count;
    row["accuracy"] = r.accuracy;
    row["moving_avg"] = report.moving_avg[i];
    doc["per_bin"].push_back(std::move(row));
  }
  doc["per_continent"] = nlohmann::ordered_json::array();
  for (const ContinentRecord& r : report.per_continent) {
    nlohmann::ordered_json row;
    row["continent"] =
        r.continent ? std::string(continent_name(*r.continent)) : std::string("unknown");
    row["count"] = r.count;
    row["accuracy"] = r.accuracy;
    doc["per_continent"].push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

std::string curve_to_csv(const FairnessReport& report) {
  std::string out = "bin_lower,bin_upper,n,accuracy,moving_avg\n";
  for (std::size_t i = 0; i < report.per_bin.size(); ++i) {
    const BinRecord& r = report.per_bin[i];
    out += format_double(r.bin_lower);
    out += ',' + format_double(r.bin_upper);
    out += ',' + std::to_string(r.count);
    out += ',' + format_double(r.accuracy);
    out += ',' + format_double(report.moving_avg[i]);
    out += '\n';
  }
  return out;
}

std::string curve_to_svg(const FairnessReport& report) {
  constexpr double width = 640.0, height = 400.0, margin = 50.0;
  const double plot_w = width - 2 * margin, plot_h = height - 2 * margin;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
  svg += "  <rect width=\"640\" height=\"400\" fill=\"white\"/>\n";

  if (!report.per_bin.empty()) {
    const double x_min = report.per_bin.front().bin_lower;
    const double x_max = report.per_bin.back().bin_upper;
    const double x_span = x_max > x_min ? x_max - x_min : 1.0;
    auto px = [&](double income) {
      return margin + (income - x_min) / x_span * plot_w;
    };
    auto py = [&](double accuracy) { return height - margin - accuracy * plot_h; };

    // Light gridlines at 0.25 accuracy steps.
    for (int g = 0; g <= 4; ++g) {
      const double y = py(0.25 * g);
      svg += "  <line x1=\"" + format_double(margin) + "\" y1=\"" + format_double(y) +
             "\" x2=\"" + format_double(width - margin) + "\" y2=\"" + format_double(y) +
             "\" stroke=\"#dddddd\"/>\n";
      svg += "  <text x=\"8\" y=\"" + format_double(y + 4) +
             "\" font-size=\"12\" font-family=\"sans-serif\">" +
             format_double(0.25 * g) + "</text>\n";
    }

    std::string points;
    for (std::size_t i = 0; i < report.per_bin.size(); ++i) {
      const double mid = 0.5 * (report.per_bin[i].bin_lower + report.per_bin[i].bin_upper);
      points += format_double(px(mid)) + "," + format_double(py(report.moving_avg[i])) + " ";
    }
    svg += "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"" +
           points + "\"/>\n";

    svg += "  <text x=\"" + format_double(width / 2 - 30) + "\" y=\"" +
           format_double(height - 12) +
           "\" font-size=\"12\" font-family=\"sans-serif\">income</text>\n";
    svg += "  <text x=\"" + format_double(margin) + "\" y=\"20\" font-size=\"12\" "
           "font-family=\"sans-serif\">top-" +
           std::to_string(report.k) + " accuracy (moving avg over " +
           std::to_string(report.window) + " bins)</text>\n";
  }

  svg += "  <line x1=\"" + format_double(margin) + "\" y1=\"" +
         format_double(height - margin) + "\" x2=\"" + format_double(width - margin) +
         "\" y2=\"" + format_double(height - margin) + "\" stroke=\"black\"/>\n";
  svg += "  <line x1=\"" + format_double(margin) + "\" y1=\"" + format_double(margin) +
         "\" x2=\"" + format_double(margin) + "\" y2=\"" + format_double(height - margin) +
         "\" stroke=\"black\"/>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace geofair
