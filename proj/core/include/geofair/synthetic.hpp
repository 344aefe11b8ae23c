#pragma once

#include <cstdint>

#include "geofair/dataset.hpp"

namespace geofair {

/// Configuration of the synthetic biased benchmark generator.
///
/// Class means sit on a sphere of radius 3 in feature space; incomes are
/// log-uniform on [income_min, income_max]; class frequencies follow
/// (class index + 1)^(-imbalance_exponent). Samples with income below the
/// batch's empirical median receive an extra domain shift: a rotation in
/// the (f0, f1) plane and a fixed translation, both scaled by
/// shift_strength, plus additive noise with standard deviation
/// shift_strength * (1 - income/median), so lower income means a larger
/// shift. Everything is a pure function of the seed.
struct SynthConfig {
  int num_classes = 10;
  int feature_dim = 16;
  int samples_per_run = 10000;
  double income_min = 100.0;
  double income_max = 10000.0;
  double shift_strength = 0.0;
  double imbalance_exponent = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

DatasetManifest generate_synthetic(const SynthConfig& config);

}  // namespace geofair
