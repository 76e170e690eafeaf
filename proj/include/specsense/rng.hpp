#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace specsense {

/// Counter-based generator: output i is splitmix64(key + i * golden).
/// Satisfies UniformRandomBitGenerator, so std distributions can draw from it.
/// Any stream is fully determined by its key; there is no hidden global state.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix(key_ + (++counter_) * kGolden); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Seed domains keep training, calibration and evaluation streams disjoint.
enum class SeedDomain : std::uint64_t {
  train_data = 1,
  test_data = 2,
  calibration_data = 3,
  validation_data = 4,
  evaluation = 5,
  init = 6,
  shuffle = 7,
  dropout = 8,
  surrogate = 9,
};

/// Derives a child seed from a master seed and a path of integers.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;
std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain,
                          std::initializer_list<std::uint64_t> path = {}) noexcept;

}  // namespace specsense
