#include "geofair/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "geofair/format.hpp"

namespace geofair {

namespace {

constexpr std::array<std::string_view, 6> kContinentNames = {
    "Africa", "Asia", "Europe", "NorthAmerica", "SouthAmerica", "Oceania"};

}  // namespace

std::string_view continent_name(Continent c) {
  return kContinentNames[static_cast<std::size_t>(c)];
}

std::optional<Continent> continent_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kContinentNames.size(); ++i) {
    if (kContinentNames[i] == name) return static_cast<Continent>(i);
  }
  return std::nullopt;
}

void DatasetManifest::validate() const {
  if (samples.empty()) throw ValidationError("manifest contains no samples");
  if (num_classes <= 0) throw ValidationError("manifest num_classes must be positive");
  if (feature_dim <= 0) throw ValidationError("manifest feature_dim must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const std::string where = " (sample " + std::to_string(i) + ", id '" + s.id + "')";
    if (!(s.income > 0.0) || !std::isfinite(s.income)) {
      throw ValidationError("income must be strictly positive" + where);
    }
    if (s.label < 0 || s.label >= num_classes) {
      throw ValidationError("label " + std::to_string(s.label) + " out of range" + where);
    }
    if (s.features.size() != static_cast<std::size_t>(feature_dim)) {
      throw ValidationError("feature length " + std::to_string(s.features.size()) +
                            " does not match feature_dim " +
                            std::to_string(feature_dim) + where);
    }
    for (double f : s.features) {
      if (!std::isfinite(f)) throw ValidationError("non-finite feature" + where);
    }
    if (s.latitude && !(*s.latitude >= -90.0 && *s.latitude <= 90.0)) {
      throw ValidationError("latitude out of [-90, 90]" + where);
    }
    if (s.longitude && !(*s.longitude >= -180.0 && *s.longitude <= 180.0)) {
      throw ValidationError("longitude out of [-180, 180]" + where);
    }
  }
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

constexpr std::size_t kFixedColumns = 6;  // id,label,income,latitude,longitude,continent

int parse_feature_dim(const std::vector<std::string_view>& header) {
  const std::array<std::string_view, kFixedColumns> expected = {
      "id", "label", "income", "latitude", "longitude", "continent"};
  if (header.size() < kFixedColumns + 1) {
    throw ParseError("manifest header needs at least one feature column", 1,
                     header.size());
  }
  for (std::size_t i = 0; i < kFixedColumns; ++i) {
    if (header[i] != expected[i]) {
      throw ParseError("manifest header column '" + std::string(header[i]) +
                           "' should be '" + std::string(expected[i]) + "'",
                       1, i + 1);
    }
  }
  const std::size_t dim = header.size() - kFixedColumns;
  for (std::size_t i = 0; i < dim; ++i) {
    const std::string want = "f" + std::to_string(i);
    if (header[kFixedColumns + i] != want) {
      throw ParseError("feature column '" + std::string(header[kFixedColumns + i]) +
                           "' should be '" + want + "'",
                       1, kFixedColumns + i + 1);
    }
  }
  return static_cast<int>(dim);
}

}  // namespace

DatasetManifest manifest_from_csv(std::string_view text) {
  DatasetManifest manifest;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  int max_label = -1;

  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    if (pos > text.size() && line.empty()) break;
    ++line_no;
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (line_no == 1) {
      manifest.feature_dim = parse_feature_dim(fields);
      continue;
    }
    if (fields.size() != kFixedColumns + static_cast<std::size_t>(manifest.feature_dim)) {
      throw ParseError("row has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(kFixedColumns + manifest.feature_dim),
                       line_no, fields.size());
    }

    auto fail = [&](std::size_t column, const std::string& message) -> ParseError {
      return ParseError(message, line_no, column + 1);
    };
    auto number_at = [&](std::size_t column, const char* what) -> double {
      try {
        return parse_double(fields[column], what);
      } catch (const ValidationError& e) {
        throw fail(column, e.what());
      }
    };

    Sample s;
    if (fields[0].empty()) throw fail(0, "missing id");
    s.id = std::string(fields[0]);
    try {
      s.label = static_cast<int>(parse_int(fields[1], "label"));
    } catch (const ValidationError& e) {
      throw fail(1, e.what());
    }
    if (s.label < 0) throw fail(1, "label must be non-negative");
    if (fields[2].empty()) throw fail(2, "missing income");
    s.income = number_at(2, "income");
    if (!(s.income > 0.0)) {
      throw fail(2, "income must be strictly positive, got '" +
                        std::string(fields[2]) + "'");
    }
    if (!fields[3].empty()) {
      s.latitude = number_at(3, "latitude");
      if (!(*s.latitude >= -90.0 && *s.latitude <= 90.0)) {
        throw fail(3, "latitude out of [-90, 90]");
      }
    }
    if (!fields[4].empty()) {
      s.longitude = number_at(4, "longitude");
      if (!(*s.longitude >= -180.0 && *s.longitude <= 180.0)) {
        throw fail(4, "longitude out of [-180, 180]");
      }
    }
    if (!fields[5].empty()) {
      s.continent = continent_from_name(fields[5]);
      if (!s.continent) {
        throw fail(5, "unknown continent '" + std::string(fields[5]) + "'");
      }
    }
    s.features.reserve(manifest.feature_dim);
    for (int f = 0; f < manifest.feature_dim; ++f) {
      const double v = number_at(kFixedColumns + f, "feature");
      if (!std::isfinite(v)) throw fail(kFixedColumns + f, "non-finite feature");
      s.features.push_back(v);
    }

    max_label = std::max(max_label, s.label);
    manifest.samples.push_back(std::move(s));
  }

  if (manifest.samples.empty()) {
    throw ValidationError("manifest has no samples");
  }
  manifest.num_classes = max_label + 1;
  manifest.validate();
  return manifest;
}

DatasetManifest ingest_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return manifest_from_csv(buf.str());
}

std::string manifest_to_csv(const DatasetManifest& manifest) {
  std::string out = "id,label,income,latitude,longitude,continent";
  for (int f = 0; f < manifest.feature_dim; ++f) out += ",f" + std::to_string(f);
  out += "\n";
  for (const Sample& s : manifest.samples) {
    out += s.id;
    out += ',' + std::to_string(s.label);
    out += ',' + format_double(s.income);
    out += ',';
    if (s.latitude) out += format_double(*s.latitude);
    out += ',';
    if (s.longitude) out += format_double(*s.longitude);
    out += ',';
    if (s.continent) out += std::string(continent_name(*s.continent));
    for (double f : s.features) out += ',' + format_double(f);
    out += '\n';
  }
  return out;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << manifest_to_csv(manifest);
  if (!out) throw IoError("failed writing manifest '" + path.string() + "'");
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char byte : text) {
    hash ^= byte;
    hash *= 1099511628211ull;
  }
  return hash;
}

bool is_validation_id(std::string_view id) { return fnv1a64(id) % 5 == 0; }

TrainValSplit split_train_validation(const DatasetManifest& manifest) {
  TrainValSplit split;
  split.train.num_classes = split.validation.num_classes = manifest.num_classes;
  split.train.feature_dim = split.validation.feature_dim = manifest.feature_dim;
  for (const Sample& s : manifest.samples) {
    (is_validation_id(s.id) ? split.validation : split.train).samples.push_back(s);
  }
  return split;
}

}  // namespace geofair
