#pragma once

#include <array>
#include <filesystem>
#include <string_view>
#include <vector>

#include "geofair/dataset.hpp"

namespace geofair {

/// Continent -> nominal GDP per capita (USD), the income proxy applied when
/// only coordinates are known. A deliberately crude, fixed mapping.
struct ContinentIncomeTable {
  static const ContinentIncomeTable& standard();

  double value(Continent c) const { return values_[static_cast<std::size_t>(c)]; }

  /// Continents in descending income order (reporting order).
  static std::array<Continent, 6> by_income_descending();

 private:
  //            Africa  Asia    Europe   NAmer    SAmer   Oceania
  std::array<double, 6> values_ = {1930.0, 7350.0, 29410.0, 49240.0,
                                   8560.0, 53220.0};
};

/// Coarse continent outlines, one ring per continent, vertices as lon/lat.
class ContinentPolygons {
 public:
  struct Ring {
    Continent continent;
    std::vector<std::array<double, 2>> vertices;  // {lon, lat}
  };

  /// The outlines packaged with the library (see core/data/continents.poly).
  static const ContinentPolygons& builtin();

  /// Parses the documented polygon text format.
  static ContinentPolygons parse(std::string_view text);
  static ContinentPolygons load(const std::filesystem::path& path);

  const std::vector<Ring>& rings() const { return rings_; }

 private:
  std::vector<Ring> rings_;
};

/// Maps a coordinate to a continent: the ring containing the point wins
/// (even-odd rule); a point inside no ring (ocean, offshore island) resolves
/// to the continent of the nearest ring vertex by great-circle distance.
/// Total and deterministic over valid coordinates; out-of-range coordinates
/// raise ValidationError.
Continent resolve_continent(double latitude, double longitude,
                            const ContinentPolygons& polygons);
Continent resolve_continent(double latitude, double longitude);

/// Sets the sample's income from the continent table. An existing positive
/// income is preserved unless `override_existing` is set. Missing continent
/// raises ValidationError.
Sample assign_income_from_continent(Sample sample, const ContinentIncomeTable& table,
                                    bool override_existing = false);

}  // namespace geofair
