#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace geofair {

/// Deterministic random source. Wraps std::mt19937_64, whose output sequence
/// is fixed by the C++ standard, and derives uniform/Gaussian variates with
/// its own transforms so that identical seeds produce identical streams on
/// every platform. All stochastic operations in the library take an explicit
/// Rng; there is no hidden global state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller. Stateless between calls: the second
  /// variate of each pair is discarded so the consumption pattern stays easy
  /// to reason about when freezing draw orders.
  double gaussian();

  /// Uniform integer in [0, n). Rejection sampling, so no modulo bias.
  std::size_t uniform_index(std::size_t n);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace geofair
