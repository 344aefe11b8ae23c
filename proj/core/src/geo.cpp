#include "geofair/geo.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "geofair/continent_data.hpp"
#include "geofair/format.hpp"

namespace geofair {

const ContinentIncomeTable& ContinentIncomeTable::standard() {
  static const ContinentIncomeTable table;
  return table;
}

std::array<Continent, 6> ContinentIncomeTable::by_income_descending() {
  return {Continent::Oceania,      Continent::NorthAmerica, Continent::Europe,
          Continent::SouthAmerica, Continent::Asia,         Continent::Africa};
}

ContinentPolygons ContinentPolygons::parse(std::string_view text) {
  ContinentPolygons polygons;
  Ring current;
  bool in_record = false;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;

    if (!in_record) {
      const auto continent = continent_from_name(line);
      if (!continent) {
        throw ParseError("expected a continent name, got '" + std::string(line) + "'",
                         line_no, 1);
      }
      current = Ring{*continent, {}};
      in_record = true;
      continue;
    }
    if (line == "end") {
      if (current.vertices.size() < 3) {
        throw ParseError("ring needs at least 3 vertices", line_no, 1);
      }
      polygons.rings_.push_back(std::move(current));
      in_record = false;
      continue;
    }
    const std::size_t space = line.find(' ');
    if (space == std::string_view::npos) {
      throw ParseError("expected 'lon lat'", line_no, 1);
    }
    const double lon = parse_double(line.substr(0, space), "longitude");
    std::string_view rest = line.substr(space + 1);
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    const double lat = parse_double(rest, "latitude");
    if (lon < -180.0 || lon > 180.0 || lat < -90.0 || lat > 90.0) {
      throw ParseError("vertex out of range", line_no, 1);
    }
    current.vertices.push_back({lon, lat});
  }
  if (in_record) throw ValidationError("polygon file ends inside a record");
  if (polygons.rings_.empty()) throw ValidationError("polygon file has no records");
  return polygons;
}

ContinentPolygons ContinentPolygons::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open polygon file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const ContinentPolygons& ContinentPolygons::builtin() {
  static const ContinentPolygons polygons = parse(detail::kContinentPolyText);
  return polygons;
}

namespace {

/// Even-odd ray casting on the lon/lat plane (none of the packaged rings
/// cross the antimeridian).
bool point_in_ring(double lon, double lat, const ContinentPolygons::Ring& ring) {
  bool inside = false;
  const auto& v = ring.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const double xi = v[i][0], yi = v[i][1];
    const double xj = v[j][0], yj = v[j][1];
    const bool crosses = (yi > lat) != (yj > lat);
    if (crosses && lon < (xj - xi) * (lat - yi) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}

/// Great-circle central angle between two lon/lat points, in radians.
double central_angle(double lon1, double lat1, double lon2, double lat2) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double phi1 = lat1 * deg, phi2 = lat2 * deg;
  const double dphi = (lat2 - lat1) * deg;
  const double dlambda = (lon2 - lon1) * deg;
  const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) *
                       std::sin(dlambda / 2);
  return 2.0 * std::asin(std::min(1.0, std::sqrt(a)));
}

}  // namespace

Continent resolve_continent(double latitude, double longitude,
                            const ContinentPolygons& polygons) {
  if (!(latitude >= -90.0 && latitude <= 90.0)) {
    throw ValidationError("latitude " + std::to_string(latitude) +
                          " out of [-90, 90]");
  }
  if (!(longitude >= -180.0 && longitude <= 180.0)) {
    throw ValidationError("longitude " + std::to_string(longitude) +
                          " out of [-180, 180]");
  }
  for (const auto& ring : polygons.rings()) {
    if (point_in_ring(longitude, latitude, ring)) return ring.continent;
  }
  // Ocean or offshore island: nearest ring vertex wins.
  double best = std::numeric_limits<double>::infinity();
  Continent nearest = polygons.rings().front().continent;
  for (const auto& ring : polygons.rings()) {
    for (const auto& v : ring.vertices) {
      const double d = central_angle(longitude, latitude, v[0], v[1]);
      if (d < best) {
        best = d;
        nearest = ring.continent;
      }
    }
  }
  return nearest;
}

Continent resolve_continent(double latitude, double longitude) {
  return resolve_continent(latitude, longitude, ContinentPolygons::builtin());
}

Sample assign_income_from_continent(Sample sample, const ContinentIncomeTable& table,
                                    bool override_existing) {
  if (!sample.continent) {
    throw ValidationError("sample '" + sample.id + "' has no continent");
  }
  if (override_existing || !(sample.income > 0.0)) {
    sample.income = table.value(*sample.continent);
  }
  return sample;
}

}  // namespace geofair
