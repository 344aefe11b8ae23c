#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geofair/errors.hpp"

namespace geofair {

enum class Continent {
  Africa,
  Asia,
  Europe,
  NorthAmerica,
  SouthAmerica,
  Oceania,
};

inline constexpr std::array<Continent, 6> kAllContinents = {
    Continent::Africa,       Continent::Asia,         Continent::Europe,
    Continent::NorthAmerica, Continent::SouthAmerica, Continent::Oceania,
};

std::string_view continent_name(Continent c);
std::optional<Continent> continent_from_name(std::string_view name);

/// One labeled example: feature vector, class label, monthly income, and
/// optional geographic metadata.
struct Sample {
  std::string id;
  int label = 0;
  double income = 0.0;  // monthly USD; must be > 0 in a validated manifest
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::optional<Continent> continent;
  std::vector<double> features;

  bool operator==(const Sample&) const = default;
};

/// Ordered collection of samples plus the class count and feature width
/// they were validated against.
struct DatasetManifest {
  std::vector<Sample> samples;
  int num_classes = 0;
  int feature_dim = 0;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }

  /// Throws ValidationError on any broken invariant (bad income, label out
  /// of range, feature length mismatch, coordinates out of range).
  void validate() const;

  bool operator==(const DatasetManifest&) const = default;
};

/// Reads the documented manifest CSV. Header must be
///   id,label,income,latitude,longitude,continent,f0,...,f{D-1}
/// latitude/longitude/continent may be empty; everything else is required.
/// Bad rows are rejected with their line (and field column) number.
DatasetManifest ingest_manifest(const std::filesystem::path& path);

/// Writes a manifest in the same CSV format, with round-trip exact floats.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

std::string manifest_to_csv(const DatasetManifest& manifest);
DatasetManifest manifest_from_csv(std::string_view text);

/// FNV-1a over the bytes of `text`; the stable hash behind holdout splits.
std::uint64_t fnv1a64(std::string_view text);

/// True when the sample id falls in the 20% validation share. The split
/// depends only on the id, never on file order, so resampling the training
/// set cannot leak into validation.
bool is_validation_id(std::string_view id);

struct TrainValSplit {
  DatasetManifest train;
  DatasetManifest validation;
};

/// Deterministic 80/20 holdout by hashed sample id.
TrainValSplit split_train_validation(const DatasetManifest& manifest);

}  // namespace geofair
