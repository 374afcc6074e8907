#pragma once

#include <cstdint>

namespace rankanneal {

// Counter-based generator: output i is a pure function of (seed, i), so a
// stream can be replayed exactly and child streams can be derived without
// touching the parent's counter. Used everywhere instead of std::
// distributions to keep runs bit-reproducible across platforms.
class SplitRng {
 public:
  using result_type = std::uint64_t;

  explicit SplitRng(std::uint64_t seed) : seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() { return mix(seed_, counter_++); }

  // Independent child stream; the parent's counter is not advanced.
  [[nodiscard]] SplitRng split(std::uint64_t tag) const {
    return SplitRng(mix(seed_, 0x5851f42d4c957f2dULL ^ tag));
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n); n must be positive. Fixed-point multiply, no rejection.
  std::size_t uniform_index(std::size_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::size_t>((u128((*this)()) * u128(n)) >> 64);
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// Stable per-run seed derivation: adding repeats or ks never perturbs the
// seeds of earlier cells.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b) {
  return SplitRng::mix(SplitRng::mix(base, a), b);
}

}  // namespace rankanneal
