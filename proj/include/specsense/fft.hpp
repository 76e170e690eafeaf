#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace specsense::fft {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// In-place radix-2 transform, X[k] = sum_n x[n] e^{-2 pi i k n / N} (forward) or the
/// unscaled conjugate kernel (inverse). Length must be a power of two.
void transform(std::span<std::complex<double>> data, bool inverse = false);

std::vector<std::complex<double>> forward(std::span<const std::complex<float>> x);

}  // namespace specsense::fft
