#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace subjaudit {

/// Derives an independent 64-bit seed for `stream` from a base seed (splitmix64).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator whose derived draws are bit-reproducible across standard
/// libraries. Only the engine comes from <random>; the std distributions are
/// implementation-defined and are not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw (Box-Muller, second value cached).
  double normal();

  /// Unbiased integer in [0, n). `n` must be positive.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace subjaudit
