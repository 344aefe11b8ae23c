#include "geofair/binning.hpp"

#include <cmath>

namespace geofair {

IncomeBinning bin_by_income(const DatasetManifest& manifest, double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("bin_width must be positive");
  IncomeBinning binning;
  binning.bin_width = bin_width;
  binning.assignment.reserve(manifest.samples.size());
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    const long long bin =
        static_cast<long long>(std::floor(manifest.samples[i].income / bin_width));
    binning.assignment.push_back(bin);
    binning.bins[bin].push_back(i);
  }
  return binning;
}

DatasetManifest resample_to_threshold(const DatasetManifest& manifest,
                                      const IncomeBinning& binning,
                                      std::size_t threshold, Rng& rng) {
  if (manifest.empty()) throw ValidationError("cannot resample an empty manifest");
  if (threshold == 0) throw ValidationError("threshold must be at least 1");
  if (binning.assignment.size() != manifest.samples.size()) {
    throw ValidationError("binning does not match manifest");
  }

  DatasetManifest out;
  out.num_classes = manifest.num_classes;
  out.feature_dim = manifest.feature_dim;
  out.samples.reserve(binning.bins.size() * threshold);

  for (const auto& [bin, indices] : binning.bins) {
    if (indices.empty()) continue;
    if (indices.size() >= threshold) {
      // Without replacement: partial Fisher-Yates, keep the first
      // `threshold` draws in draw order.
      std::vector<std::size_t> pool = indices;
      for (std::size_t i = 0; i < threshold; ++i) {
        const std::size_t j = i + rng.uniform_index(pool.size() - i);
        std::swap(pool[i], pool[j]);
        out.samples.push_back(manifest.samples[pool[i]]);
      }
    } else {
      // With replacement, uniform over the bin.
      for (std::size_t i = 0; i < threshold; ++i) {
        out.samples.push_back(manifest.samples[indices[rng.uniform_index(indices.size())]]);
      }
    }
  }
  return out;
}

}  // namespace geofair
