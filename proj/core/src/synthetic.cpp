#include "geofair/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "geofair/rng.hpp"

namespace geofair {

namespace {

constexpr double kClassMeanRadius = 3.0;
constexpr double kRotationRadiansPerShift = 0.35;

}  // namespace

void SynthConfig::validate() const {
  if (num_classes <= 0) throw ValidationError("SynthConfig: num_classes must be positive");
  if (feature_dim <= 0) throw ValidationError("SynthConfig: feature_dim must be positive");
  if (samples_per_run <= 0) {
    throw ValidationError("SynthConfig: samples_per_run must be positive");
  }
  if (!(income_min > 0.0) || !(income_max > income_min)) {
    throw ValidationError("SynthConfig: need 0 < income_min < income_max");
  }
  if (!(shift_strength >= 0.0)) {
    throw ValidationError("SynthConfig: shift_strength must be >= 0");
  }
  if (!(imbalance_exponent >= 0.0)) {
    throw ValidationError("SynthConfig: imbalance_exponent must be >= 0");
  }
}

DatasetManifest generate_synthetic(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int dims = config.feature_dim;
  const int n = config.samples_per_run;

  // Class means on a sphere of radius 3.
  std::vector<std::vector<double>> class_means(config.num_classes);
  for (auto& mean : class_means) {
    mean.resize(dims);
    double norm = 0.0;
    for (double& v : mean) {
      v = rng.gaussian();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) norm = 1.0;
    for (double& v : mean) v *= kClassMeanRadius / norm;
  }

  // Class frequencies proportional to (c+1)^(-imbalance_exponent).
  std::vector<double> cumulative(config.num_classes);
  double total = 0.0;
  for (int c = 0; c < config.num_classes; ++c) {
    total += std::pow(static_cast<double>(c + 1), -config.imbalance_exponent);
    cumulative[c] = total;
  }
  for (double& v : cumulative) v /= total;

  DatasetManifest manifest;
  manifest.num_classes = config.num_classes;
  manifest.feature_dim = dims;
  manifest.samples.reserve(n);

  const double log_min = std::log(config.income_min);
  const double log_max = std::log(config.income_max);

  for (int i = 0; i < n; ++i) {
    Sample s;
    char id[16];
    std::snprintf(id, sizeof(id), "s%07d", i);
    s.id = id;

    const double u = rng.uniform();
    s.label = static_cast<int>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    if (s.label >= config.num_classes) s.label = config.num_classes - 1;

    s.income = std::exp(rng.uniform(log_min, log_max));

    s.features.resize(dims);
    const auto& mean = class_means[s.label];
    for (int d = 0; d < dims; ++d) s.features[d] = mean[d] + rng.gaussian();
    manifest.samples.push_back(std::move(s));
  }

  // Empirical income median decides which half is shifted.
  std::vector<double> incomes(n);
  for (int i = 0; i < n; ++i) incomes[i] = manifest.samples[i].income;
  std::nth_element(incomes.begin(), incomes.begin() + n / 2, incomes.end());
  double median = incomes[n / 2];
  if (n % 2 == 0) {
    const double below = *std::max_element(incomes.begin(), incomes.begin() + n / 2);
    median = 0.5 * (median + below);
  }

  if (config.shift_strength > 0.0) {
    const double s = config.shift_strength;
    const double angle = kRotationRadiansPerShift * s;
    const double cos_a = std::cos(angle), sin_a = std::sin(angle);
    const double translation = s / std::sqrt(static_cast<double>(dims));
    for (auto& sample : manifest.samples) {
      if (!(sample.income < median)) continue;
      auto& f = sample.features;
      if (dims >= 2) {
        const double f0 = f[0], f1 = f[1];
        f[0] = cos_a * f0 - sin_a * f1;
        f[1] = sin_a * f0 + cos_a * f1;
      }
      // Translation of magnitude shift_strength along (1,...,1)/sqrt(D).
      for (int d = 0; d < dims; ++d) f[d] += translation;
      const double extra = s * (1.0 - sample.income / median);
      for (int d = 0; d < dims; ++d) f[d] += extra * rng.gaussian();
    }
  }
  return manifest;
}

}  // namespace geofair
