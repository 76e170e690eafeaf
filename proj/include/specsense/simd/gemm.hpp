#pragma once

#include <cstddef>

#include "specsense/simd/kernels.hpp"

namespace specsense::simd {

/// Read-only strided matrix view: element (i, j) lives at data[i*row_stride + j*col_stride].
/// Transposes are expressed by swapping the strides.
template <typename T>
struct MatrixView {
  const T* data;
  std::ptrdiff_t row_stride;
  std::ptrdiff_t col_stride;

  const T& operator()(std::size_t i, std::size_t j) const noexcept {
    return data[static_cast<std::ptrdiff_t>(i) * row_stride + static_cast<std::ptrdiff_t>(j) * col_stride];
  }
  MatrixView transposed() const noexcept { return {data, col_stride, row_stride}; }
};

template <typename T>
MatrixView<T> row_major(const T* data, std::size_t ld) noexcept {
  return {data, static_cast<std::ptrdiff_t>(ld), 1};
}

/// C (m x n, row-major, leading dimension ldc) = [C +] A (m x k) * B (k x n).
/// float runs on the active kernel table; double runs the portable tile (used for gradient checks).
void gemm(std::size_t m, std::size_t n, std::size_t k, MatrixView<float> a, MatrixView<float> b,
          float* c, std::size_t ldc, bool accumulate);
void gemm(std::size_t m, std::size_t n, std::size_t k, MatrixView<float> a, MatrixView<float> b,
          float* c, std::size_t ldc, bool accumulate, const KernelTable& table);
void gemm(std::size_t m, std::size_t n, std::size_t k, MatrixView<double> a, MatrixView<double> b,
          double* c, std::size_t ldc, bool accumulate);

}  // namespace specsense::simd
