#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geofair/dataset.hpp"
#include "geofair/matrix.hpp"
#include "geofair/mlp.hpp"

namespace geofair {

/// Per-sample top-k hits: 1 iff the true label's logit is among the k
/// largest in its row. Ties rank the lower class index first, so the result
/// is deterministic. Requires 1 <= k < num_classes.
std::vector<std::uint8_t> topk_hits(const Matrix& logits, const std::vector<int>& labels,
                                    int k);

struct BinRecord {
  double bin_lower = 0.0;
  double bin_upper = 0.0;
  std::size_t count = 0;
  double accuracy = 0.0;
};

/// Accuracy per non-empty income bin of width `bin_width`, ascending.
std::vector<BinRecord> binned_accuracy(const std::vector<Sample>& samples,
                                       const std::vector<std::uint8_t>& hits,
                                       double bin_width);

/// Trailing moving average over the records: the smoothed value at record j
/// is the unweighted mean of up to `window` consecutive non-empty bins
/// ending at and including j (fewer near the start). Returned values align
/// with the input records.
std::vector<double> moving_average_curve(const std::vector<BinRecord>& records,
                                         int window = 10);

struct ContinentRecord {
  std::optional<Continent> continent;  // nullopt = unknown
  std::size_t count = 0;
  double accuracy = 0.0;
};

/// Accuracy per continent present in the data, ordered by table income
/// descending; samples without a continent are counted under an explicit
/// "unknown" bucket at the end, never dropped.
std::vector<ContinentRecord> continent_accuracy(const std::vector<Sample>& samples,
                                                const std::vector<std::uint8_t>& hits);

/// Overall and per-subgroup accuracies of one evaluation run, plus the two
/// disparity summaries of the smoothed income curve.
struct FairnessReport {
  double overall_topk = 0.0;
  int k = 0;
  double bin_width = 0.0;
  int window = 0;
  std::size_t num_samples = 0;
  std::vector<BinRecord> per_bin;
  std::vector<double> moving_avg;  // aligned with per_bin
  std::vector<ContinentRecord> per_continent;
  double accuracy_range = 0.0;  // max - min over the smoothed curve
  double low_high_gap = 0.0;    // mean smoothed accuracy, top-half minus bottom-half bins
};

/// Evaluation-mode forward pass through a chain of models (encoder(s)
/// followed by a classifier; a plain classifier is a chain of one).
Matrix forward_pipeline_eval(std::span<const MlpModel* const> pipeline,
                             const Matrix& batch);

FairnessReport build_report(std::span<const MlpModel* const> pipeline,
                            const DatasetManifest& manifest, int k,
                            double bin_width = 300.0, int window = 10);
FairnessReport build_report(const MlpModel& model, const DatasetManifest& manifest,
                            int k, double bin_width = 300.0, int window = 10);

/// Plain top-k accuracy of a model chain on a manifest.
double topk_accuracy(std::span<const MlpModel* const> pipeline,
                     const DatasetManifest& manifest, int k);
double topk_accuracy(const MlpModel& model, const DatasetManifest& manifest, int k);

/// Stable-key-order JSON document for the report.
std::string report_to_json(const FairnessReport& report);

/// Curve CSV: bin_lower,bin_upper,n,accuracy,moving_avg
std::string curve_to_csv(const FairnessReport& report);

/// Minimal SVG line chart of the smoothed accuracy curve over income.
std::string curve_to_svg(const FairnessReport& report);

}  // namespace geofair
