#include "specsense/simd/kernels.hpp"

namespace specsense::simd::detail {
namespace {

void gemm_tile(std::size_t depth, const float* a, const float* b, float* c, std::size_t ldc,
               bool accumulate) {
  float acc[kTileRows][kTileCols] = {};
  for (std::size_t p = 0; p < depth; ++p) {
    for (std::size_t i = 0; i < kTileRows; ++i) {
      const float ai = a[i];
      for (std::size_t j = 0; j < kTileCols; ++j) acc[i][j] += ai * b[j];
    }
    a += kTileRows;
    b += kTileCols;
  }
  for (std::size_t i = 0; i < kTileRows; ++i) {
    float* row = c + i * ldc;
    if (accumulate) {
      for (std::size_t j = 0; j < kTileCols; ++j) row[j] += acc[i][j];
    } else {
      for (std::size_t j = 0; j < kTileCols; ++j) row[j] = acc[i][j];
    }
  }
}

void norm2_f64(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1];
}

void sum_sumsq(const float* x, std::size_t n, double* sum, double* sumsq) {
  double s = 0.0, q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i];
    s += v;
    q += v * v;
  }
  *sum = s;
  *sumsq = q;
}

void sum_dot(const float* x, const float* y, std::size_t n, double* sum_y, double* dot) {
  double s = 0.0, d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double yv = y[i];
    s += yv;
    d += static_cast<double>(x[i]) * yv;
  }
  *sum_y = s;
  *dot = d;
}

void affine(const float* x, float* y, std::size_t n, float scale, float shift, bool relu) {
  if (relu) {
    for (std::size_t i = 0; i < n; ++i) {
      const float v = scale * x[i] + shift;
      y[i] = v > 0.0F ? v : 0.0F;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) y[i] = scale * x[i] + shift;
  }
}

void lincomb(const float* u, const float* v, float* out, std::size_t n, float a, float b, float c) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * u[i] + b * v[i] + c;
}

void relu_backward(const float* y, float* dy, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!(y[i] > 0.0F)) dy[i] = 0.0F;
}

void axpy(float a, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void sgd_momentum(float* theta, float* velocity, const float* grad, std::size_t n, float lr,
                  float momentum) {
  for (std::size_t i = 0; i < n; ++i) {
    velocity[i] = momentum * velocity[i] - lr * grad[i];
    theta[i] += velocity[i];
  }
}

constexpr KernelTable kTable{
    Isa::scalar, gemm_tile, norm2_f64, sum_sumsq, sum_dot, affine, lincomb, relu_backward, axpy,
    sgd_momentum,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kTable; }

}  // namespace specsense::simd::detail
