#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "geofair/dataset.hpp"
#include "geofair/rng.hpp"

namespace geofair {

/// Sparse income binning: bin index = floor(income / bin_width). Empty bins
/// carry no entry.
struct IncomeBinning {
  double bin_width = 300.0;
  std::vector<long long> assignment;               // per sample, aligned with manifest
  std::map<long long, std::vector<std::size_t>> bins;  // bin -> sample indices
};

IncomeBinning bin_by_income(const DatasetManifest& manifest, double bin_width);

/// Equalizes the income distribution: every non-empty bin contributes
/// exactly `threshold` samples. Bins above the threshold are sampled without
/// replacement, bins below it with replacement (uniformly); empty bins are
/// skipped. Output order is bin-major (ascending bin), then draw order.
DatasetManifest resample_to_threshold(const DatasetManifest& manifest,
                                      const IncomeBinning& binning,
                                      std::size_t threshold, Rng& rng);

}  // namespace geofair
