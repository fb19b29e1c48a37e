#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace mebface {

/// Seeded random stream.
///
/// The generator is std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. All derived draws (uniform reals, normals, integer ranges,
/// shuffles) are computed here from raw 64-bit outputs rather than through
/// <random> distributions, whose algorithms are implementation-defined.
/// Identical seeds therefore give identical streams on every platform.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cached second draw).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  bool bit() { return (next_u64() >> 63) != 0; }

  /// Uniform integer in [0, n). Unbiased (rejection sampling).
  std::size_t below(std::size_t n);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  /// Independent child stream keyed by `stream`; does not advance this one.
  Rng derive(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer, used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace mebface
