#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "geofair/binning.hpp"
#include "geofair/dataset.hpp"
#include "geofair/geo.hpp"
#include "geofair/synthetic.hpp"
#include "test_util.hpp"

using namespace geofair;

namespace {

DatasetManifest tiny_manifest(const std::vector<double>& incomes) {
  DatasetManifest manifest;
  manifest.num_classes = 2;
  manifest.feature_dim = 1;
  for (std::size_t i = 0; i < incomes.size(); ++i) {
    Sample s;
    s.id = "t" + std::to_string(i);
    s.label = static_cast<int>(i % 2);
    s.income = incomes[i];
    s.features = {static_cast<double>(i)};
    manifest.samples.push_back(std::move(s));
  }
  return manifest;
}

// --- independent geometry oracles -----------------------------------------

/// Winding-number point-in-polygon; a different route than the library's
/// even-odd ray casting.
bool winding_contains(double lon, double lat, const ContinentPolygons::Ring& ring) {
  const auto& v = ring.vertices;
  int winding = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    const double cross = (b[0] - a[0]) * (lat - a[1]) - (lon - a[0]) * (b[1] - a[1]);
    if (a[1] <= lat) {
      if (b[1] > lat && cross > 0) ++winding;
    } else {
      if (b[1] <= lat && cross < 0) --winding;
    }
  }
  return winding != 0;
}

/// Nearest-vertex continent via 3D chord distance on the unit sphere (a
/// monotone transform of the great-circle angle, computed differently).
Continent chord_nearest(double lon, double lat, const ContinentPolygons& polygons) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double x = std::cos(lat * deg) * std::cos(lon * deg);
  const double y = std::cos(lat * deg) * std::sin(lon * deg);
  const double z = std::sin(lat * deg);
  double best = std::numeric_limits<double>::infinity();
  Continent nearest = Continent::Africa;
  for (const auto& ring : polygons.rings()) {
    for (const auto& v : ring.vertices) {
      const double vx = std::cos(v[1] * deg) * std::cos(v[0] * deg);
      const double vy = std::cos(v[1] * deg) * std::sin(v[0] * deg);
      const double vz = std::sin(v[1] * deg);
      const double d2 = (x - vx) * (x - vx) + (y - vy) * (y - vy) + (z - vz) * (z - vz);
      if (d2 < best) {
        best = d2;
        nearest = ring.continent;
      }
    }
  }
  return nearest;
}

Continent oracle_resolve(double lat, double lon, const ContinentPolygons& polygons) {
  for (const auto& ring : polygons.rings()) {
    if (winding_contains(lon, lat, ring)) return ring.continent;
  }
  return chord_nearest(lon, lat, polygons);
}

}  // namespace

TEST_CASE("manifest CSV: valid rows ingest in file order") {
  const std::string csv =
      "id,label,income,latitude,longitude,continent,f0,f1\n"
      "a,0,500.5,48.85,2.35,Europe,1.5,-2\n"
      "b,2,1200,,,,-0.25,3\n"
      "c,1,80,0.0,0.0,Africa,0,0\n";
  const DatasetManifest manifest = manifest_from_csv(csv);
  CHECK(manifest.size() == 3);
  CHECK(manifest.num_classes == 3);
  CHECK(manifest.feature_dim == 2);
  CHECK(manifest.samples[0].id == "a");
  CHECK(manifest.samples[0].continent == Continent::Europe);
  CHECK(manifest.samples[1].id == "b");
  CHECK_FALSE(manifest.samples[1].latitude.has_value());
  CHECK(manifest.samples[2].features == std::vector<double>{0.0, 0.0});
}

TEST_CASE("manifest CSV: header-only file reports no samples") {
  CHECK_THROWS_WITH_AS(manifest_from_csv("id,label,income,latitude,longitude,continent,f0\n"),
                       doctest::Contains("no samples"), ValidationError);
}

TEST_CASE("manifest CSV: negative income is rejected with its line") {
  const std::string csv =
      "id,label,income,latitude,longitude,continent,f0\n"
      "a,0,100,,,,1\n"
      "b,0,-5,,,,2\n";
  CHECK_THROWS_WITH_AS(manifest_from_csv(csv), doctest::Contains("line 3"), ParseError);
}

TEST_CASE("manifest CSV: malformed rows carry line and column") {
  const std::string missing_income =
      "id,label,income,latitude,longitude,continent,f0\n"
      "a,0,,,,,1\n";
  CHECK_THROWS_WITH_AS(manifest_from_csv(missing_income), doctest::Contains("line 2"),
                       ParseError);

  const std::string bad_header = "id,label,income,lat,longitude,continent,f0\nx,0,1,,,,1\n";
  CHECK_THROWS_AS(manifest_from_csv(bad_header), ParseError);

  const std::string bad_latitude =
      "id,label,income,latitude,longitude,continent,f0\n"
      "a,0,100,95,,,1\n";
  CHECK_THROWS_AS(manifest_from_csv(bad_latitude), ParseError);

  const std::string bad_continent =
      "id,label,income,latitude,longitude,continent,f0\n"
      "a,0,100,,,Atlantis,1\n";
  CHECK_THROWS_WITH_AS(manifest_from_csv(bad_continent), doctest::Contains("Atlantis"),
                       ParseError);

  const std::string short_row =
      "id,label,income,latitude,longitude,continent,f0,f1\n"
      "a,0,100,,,,1\n";
  CHECK_THROWS_AS(manifest_from_csv(short_row), ParseError);
}

TEST_CASE("manifest CSV: write/ingest round trip is exact") {
  SynthConfig config;
  config.num_classes = 4;
  config.feature_dim = 3;
  config.samples_per_run = 50;
  config.shift_strength = 1.5;
  config.seed = 99;
  DatasetManifest manifest = generate_synthetic(config);
  manifest.samples[0].latitude = 48.85;
  manifest.samples[0].longitude = 2.35;
  manifest.samples[0].continent = Continent::Europe;

  const DatasetManifest round = manifest_from_csv(manifest_to_csv(manifest));
  CHECK(round == manifest);
}

TEST_CASE("continent income table holds the six fixed values") {
  const auto& table = ContinentIncomeTable::standard();
  CHECK(table.value(Continent::Oceania) == 53220.0);
  CHECK(table.value(Continent::NorthAmerica) == 49240.0);
  CHECK(table.value(Continent::Europe) == 29410.0);
  CHECK(table.value(Continent::SouthAmerica) == 8560.0);
  CHECK(table.value(Continent::Asia) == 7350.0);
  CHECK(table.value(Continent::Africa) == 1930.0);
}

TEST_CASE("continent income values survive CSV round trips bit-exact") {
  const auto& table = ContinentIncomeTable::standard();
  DatasetManifest manifest;
  manifest.num_classes = 1;
  manifest.feature_dim = 1;
  for (Continent c : kAllContinents) {
    Sample s;
    s.id = std::string(continent_name(c));
    s.label = 0;
    s.income = table.value(c);
    s.continent = c;
    s.features = {0.0};
    manifest.samples.push_back(std::move(s));
  }
  const DatasetManifest round = manifest_from_csv(manifest_to_csv(manifest));
  for (std::size_t i = 0; i < round.samples.size(); ++i) {
    CHECK(round.samples[i].income == table.value(*round.samples[i].continent));
  }
}

TEST_CASE("assign_income_from_continent") {
  const auto& table = ContinentIncomeTable::standard();
  Sample s;
  s.id = "x";
  s.continent = Continent::Africa;

  const Sample africa = assign_income_from_continent(s, table);
  CHECK(africa.income == 1930.0);

  s.continent = Continent::Oceania;
  const Sample oceania = assign_income_from_continent(s, table);
  CHECK(oceania.income == 53220.0);

  // Existing income is preserved unless explicitly overridden.
  s.income = 777.0;
  CHECK(assign_income_from_continent(s, table).income == 777.0);
  CHECK(assign_income_from_continent(s, table, true).income == 53220.0);

  s.continent.reset();
  CHECK_THROWS_AS(assign_income_from_continent(s, table), ValidationError);
}

TEST_CASE("bin_by_income: floor semantics") {
  const double w = 300.0;
  const DatasetManifest manifest = tiny_manifest({0.5 * w, 1.5 * w, 2.5 * w});
  const IncomeBinning binning = bin_by_income(manifest, w);
  CHECK(binning.assignment == std::vector<long long>{0, 1, 2});

  const DatasetManifest edge = tiny_manifest({300.0});
  CHECK(bin_by_income(edge, 300.0).assignment == std::vector<long long>{1});

  const DatasetManifest same = tiny_manifest({450.0, 450.0, 450.0, 450.0});
  const IncomeBinning single = bin_by_income(same, 300.0);
  CHECK(single.bins.size() == 1);
  CHECK(single.bins.at(1).size() == 4);

  CHECK_THROWS_AS(bin_by_income(same, 0.0), ValidationError);
}

TEST_CASE("resample: counts forced to the threshold, bin-major order") {
  std::vector<double> incomes;
  for (int i = 0; i < 10; ++i) incomes.push_back(100.0);  // bin 0
  for (int i = 0; i < 3; ++i) incomes.push_back(400.0);   // bin 1
  const DatasetManifest manifest = tiny_manifest(incomes);
  const IncomeBinning binning = bin_by_income(manifest, 300.0);

  Rng rng(5);
  const DatasetManifest out = resample_to_threshold(manifest, binning, 5, rng);
  CHECK(out.size() == 10);
  for (std::size_t i = 0; i < 5; ++i) CHECK(out.samples[i].income == 100.0);
  for (std::size_t i = 5; i < 10; ++i) CHECK(out.samples[i].income == 400.0);
}

TEST_CASE("resample: bin at exactly the threshold is a permutation") {
  const DatasetManifest manifest = tiny_manifest({50.0, 60.0, 70.0, 80.0, 90.0});
  const IncomeBinning binning = bin_by_income(manifest, 300.0);
  Rng rng(6);
  const DatasetManifest out = resample_to_threshold(manifest, binning, 5, rng);
  CHECK(out.size() == 5);
  std::set<std::string> ids;
  for (const auto& s : out.samples) ids.insert(s.id);
  CHECK(ids.size() == 5);  // no duplicates
}

TEST_CASE("resample: undersampled bins never duplicate, oversampled must") {
  std::vector<double> incomes;
  for (int i = 0; i < 40; ++i) incomes.push_back(100.0);  // undersampled
  for (int i = 0; i < 4; ++i) incomes.push_back(400.0);   // oversampled
  const DatasetManifest manifest = tiny_manifest(incomes);
  const IncomeBinning binning = bin_by_income(manifest, 300.0);

  Rng rng(7);
  const DatasetManifest out = resample_to_threshold(manifest, binning, 10, rng);
  CHECK(out.size() == 20);

  std::set<std::string> low_ids;
  for (std::size_t i = 0; i < 10; ++i) low_ids.insert(out.samples[i].id);
  CHECK(low_ids.size() == 10);

  std::set<std::string> high_ids;
  for (std::size_t i = 10; i < 20; ++i) high_ids.insert(out.samples[i].id);
  CHECK(high_ids.size() <= 4);  // pigeonhole: duplicates required
}

TEST_CASE("resample: rejects empty manifests and zero thresholds") {
  DatasetManifest empty;
  IncomeBinning binning;
  Rng rng(8);
  CHECK_THROWS_AS(resample_to_threshold(empty, binning, 5, rng), ValidationError);

  const DatasetManifest manifest = tiny_manifest({100.0});
  const IncomeBinning real_binning = bin_by_income(manifest, 300.0);
  CHECK_THROWS_AS(resample_to_threshold(manifest, real_binning, 0, rng), ValidationError);
}

TEST_CASE("resample: oversampling draws are uniform (chi-square)") {
  // A 2-element bin oversampled to 6, repeated over many trials; the draw
  // counts across trials must be consistent with uniform at p > 0.01.
  const DatasetManifest manifest = tiny_manifest({100.0, 150.0});
  const IncomeBinning binning = bin_by_income(manifest, 300.0);

  Rng rng(9);
  std::map<std::string, std::size_t> draws;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const DatasetManifest out = resample_to_threshold(manifest, binning, 6, rng);
    for (const auto& s : out.samples) draws[s.id] += 1;
  }
  std::vector<std::size_t> counts;
  for (const auto& [id, count] : draws) counts.push_back(count);
  REQUIRE(counts.size() == 2);
  CHECK(test_util::chi_square_uniform_pvalue(counts) > 0.01);
}

TEST_CASE("synthetic: fixed seed reproduces bitwise") {
  SynthConfig config;
  config.num_classes = 6;
  config.feature_dim = 8;
  config.samples_per_run = 500;
  config.shift_strength = 2.0;
  config.imbalance_exponent = 1.0;
  config.seed = 314;
  CHECK(generate_synthetic(config) == generate_synthetic(config));
}

TEST_CASE("synthetic: zero imbalance gives near-equal class counts") {
  SynthConfig config;
  config.num_classes = 5;
  config.feature_dim = 4;
  config.samples_per_run = 10000;
  config.seed = 11;
  const DatasetManifest manifest = generate_synthetic(config);

  std::vector<std::size_t> counts(5, 0);
  for (const auto& s : manifest.samples) counts[s.label] += 1;
  CHECK(test_util::chi_square_uniform_pvalue(counts) > 0.01);
}

TEST_CASE("synthetic: positive imbalance skews class counts") {
  SynthConfig config;
  config.num_classes = 5;
  config.feature_dim = 4;
  config.samples_per_run = 10000;
  config.imbalance_exponent = 1.0;
  config.seed = 12;
  const DatasetManifest manifest = generate_synthetic(config);
  std::vector<std::size_t> counts(5, 0);
  for (const auto& s : manifest.samples) counts[s.label] += 1;
  CHECK(counts[0] > 2 * counts[4]);
}

TEST_CASE("synthetic: zero shift leaves halves identically distributed") {
  SynthConfig config;
  config.num_classes = 3;
  config.feature_dim = 6;
  config.samples_per_run = 6000;
  config.shift_strength = 0.0;
  config.seed = 13;
  const DatasetManifest manifest = generate_synthetic(config);

  std::vector<double> incomes;
  for (const auto& s : manifest.samples) incomes.push_back(s.income);
  std::nth_element(incomes.begin(), incomes.begin() + incomes.size() / 2, incomes.end());
  const double median = incomes[incomes.size() / 2];

  // Welch z-test on the first feature within each class; with no shift the
  // halves are drawn from the same distribution.
  for (int label = 0; label < 3; ++label) {
    double sum_low = 0, sum2_low = 0, n_low = 0;
    double sum_high = 0, sum2_high = 0, n_high = 0;
    for (const auto& s : manifest.samples) {
      if (s.label != label) continue;
      const double v = s.features[0];
      if (s.income < median) {
        sum_low += v;
        sum2_low += v * v;
        n_low += 1;
      } else {
        sum_high += v;
        sum2_high += v * v;
        n_high += 1;
      }
    }
    const double mean_low = sum_low / n_low, mean_high = sum_high / n_high;
    const double var_low = sum2_low / n_low - mean_low * mean_low;
    const double var_high = sum2_high / n_high - mean_high * mean_high;
    const double z = (mean_low - mean_high) /
                     std::sqrt(var_low / n_low + var_high / n_high);
    // |z| < 2.576 is the two-sided 1% acceptance region.
    CHECK(std::abs(z) < 2.576);
  }
}

TEST_CASE("synthetic: nearest-class-mean oracle favors the high-income half under shift") {
  SynthConfig config;
  config.num_classes = 5;
  config.feature_dim = 12;
  config.samples_per_run = 8000;
  config.shift_strength = 1.5;
  config.seed = 14;
  const DatasetManifest manifest = generate_synthetic(config);

  std::vector<double> incomes;
  for (const auto& s : manifest.samples) incomes.push_back(s.income);
  std::nth_element(incomes.begin(), incomes.begin() + incomes.size() / 2, incomes.end());
  const double median = incomes[incomes.size() / 2];

  // Class means estimated from the clean (high-income) half.
  std::vector<std::vector<double>> means(5, std::vector<double>(12, 0.0));
  std::vector<double> counts(5, 0.0);
  for (const auto& s : manifest.samples) {
    if (s.income < median) continue;
    for (int d = 0; d < 12; ++d) means[s.label][d] += s.features[d];
    counts[s.label] += 1;
  }
  for (int c = 0; c < 5; ++c) {
    for (double& v : means[c]) v /= std::max(counts[c], 1.0);
  }

  auto classify = [&](const Sample& s) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 5; ++c) {
      double d2 = 0.0;
      for (int d = 0; d < 12; ++d) {
        const double diff = s.features[d] - means[c][d];
        d2 += diff * diff;
      }
      if (d2 < best_d) {
        best_d = d2;
        best = c;
      }
    }
    return best;
  };

  std::vector<double> hits_low(5, 0), n_low(5, 0), hits_high(5, 0), n_high(5, 0);
  for (const auto& s : manifest.samples) {
    const bool hit = classify(s) == s.label;
    if (s.income < median) {
      n_low[s.label] += 1;
      hits_low[s.label] += hit;
    } else {
      n_high[s.label] += 1;
      hits_high[s.label] += hit;
    }
  }
  double macro_low = 0.0, macro_high = 0.0;
  for (int c = 0; c < 5; ++c) {
    macro_low += hits_low[c] / std::max(n_low[c], 1.0);
    macro_high += hits_high[c] / std::max(n_high[c], 1.0);
  }
  CHECK(macro_high / 5.0 >= macro_low / 5.0);
  CHECK(macro_high / 5.0 > macro_low / 5.0 + 0.02);  // the shift must actually bite
}

TEST_CASE("synthetic: invalid configs are rejected") {
  SynthConfig config;
  config.income_min = 500.0;
  config.income_max = 100.0;
  CHECK_THROWS_AS(generate_synthetic(config), ValidationError);
  config.income_max = 1000.0;
  config.num_classes = 0;
  CHECK_THROWS_AS(generate_synthetic(config), ValidationError);
}

TEST_CASE("resolve_continent: known cities land on their continent") {
  const struct {
    double lat, lon;
    Continent expected;
  } cases[] = {
      {48.85, 2.35, Continent::Europe},         // Paris
      {40.4, -3.7, Continent::Europe},          // Madrid
      {55.75, 37.6, Continent::Europe},         // Moscow
      {30.0, 31.2, Continent::Africa},          // Cairo
      {-1.3, 36.8, Continent::Africa},          // Nairobi
      {6.5, 3.4, Continent::Africa},            // Lagos (near coast vertex)
      {28.6, 77.2, Continent::Asia},            // Delhi
      {39.9, 116.4, Continent::Asia},           // Beijing
      {35.7, 139.7, Continent::Asia},           // Tokyo (island fallback)
      {-6.2, 106.8, Continent::Asia},           // Jakarta (island fallback)
      {24.7, 46.7, Continent::Asia},            // Riyadh
      {38.5, -98.0, Continent::NorthAmerica},   // Kansas
      {19.4, -99.1, Continent::NorthAmerica},   // Mexico City
      {23.1, -82.4, Continent::NorthAmerica},   // Havana (island fallback)
      {-15.8, -47.9, Continent::SouthAmerica},  // Brasilia
      {4.7, -74.1, Continent::SouthAmerica},    // Bogota
      {-33.5, -70.7, Continent::SouthAmerica},  // Santiago
      {-23.7, 133.9, Continent::Oceania},       // Alice Springs
      {-36.9, 174.8, Continent::Oceania},       // Auckland (fallback)
      {51.5, -0.1, Continent::Europe},          // London (island fallback)
  };
  for (const auto& c : cases) {
    CHECK(resolve_continent(c.lat, c.lon) == c.expected);
  }
}

TEST_CASE("resolve_continent: ocean points fall back to the nearest vertex") {
  CHECK(resolve_continent(0.0, 0.0) == Continent::Africa);  // Gulf of Guinea
}

TEST_CASE("resolve_continent: out-of-range coordinates are rejected") {
  CHECK_THROWS_AS(resolve_continent(91.0, 0.0), ValidationError);
  CHECK_THROWS_AS(resolve_continent(-91.0, 0.0), ValidationError);
  CHECK_THROWS_AS(resolve_continent(0.0, 181.0), ValidationError);
  CHECK_THROWS_AS(resolve_continent(0.0, -180.5), ValidationError);
}

TEST_CASE("resolve_continent: agrees with the independent geometry oracle") {
  const ContinentPolygons& polygons = ContinentPolygons::builtin();
  Rng rng(20);
  for (int trial = 0; trial < 1000; ++trial) {
    const double lat = rng.uniform(-85.0, 85.0);
    const double lon = rng.uniform(-179.5, 179.5);
    CHECK(resolve_continent(lat, lon, polygons) == oracle_resolve(lat, lon, polygons));
  }
}

TEST_CASE("polygon file: shipped data parses and matches the builtin set") {
  const std::filesystem::path path = GEOFAIR_DATA_DIR "/continents.poly";
  const ContinentPolygons loaded = ContinentPolygons::load(path);
  const ContinentPolygons& builtin = ContinentPolygons::builtin();
  REQUIRE(loaded.rings().size() == builtin.rings().size());
  REQUIRE(loaded.rings().size() == 6);
  for (std::size_t i = 0; i < loaded.rings().size(); ++i) {
    CHECK(loaded.rings()[i].continent == builtin.rings()[i].continent);
    CHECK(loaded.rings()[i].vertices == builtin.rings()[i].vertices);
    CHECK(loaded.rings()[i].vertices.size() <= 200);
  }
}

TEST_CASE("polygon file: malformed records are rejected") {
  CHECK_THROWS_AS(ContinentPolygons::parse("Atlantis\n0 0\n1 1\n2 2\nend\n"), ParseError);
  CHECK_THROWS_AS(ContinentPolygons::parse("Africa\n0 0\n1 1\nend\n"), ParseError);
  CHECK_THROWS_AS(ContinentPolygons::parse("Africa\n0 0\n1 1\n2 2\n"), ValidationError);
  CHECK_THROWS_AS(ContinentPolygons::parse(""), ValidationError);
}

TEST_CASE("train/validation split is deterministic and id-driven") {
  SynthConfig config;
  config.num_classes = 3;
  config.feature_dim = 2;
  config.samples_per_run = 5000;
  config.seed = 21;
  const DatasetManifest manifest = generate_synthetic(config);

  const TrainValSplit a = split_train_validation(manifest);
  const TrainValSplit b = split_train_validation(manifest);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.train.size() + a.validation.size() == manifest.size());
  // Roughly 20 percent held out.
  const double share = static_cast<double>(a.validation.size()) / manifest.size();
  CHECK(share > 0.15);
  CHECK(share < 0.25);

  // Shuffling the manifest moves no sample across the split.
  DatasetManifest shuffled = manifest;
  Rng rng(22);
  rng.shuffle(shuffled.samples);
  const TrainValSplit c = split_train_validation(shuffled);
  CHECK(c.validation.size() == a.validation.size());
}
