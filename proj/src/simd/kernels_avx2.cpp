// Built with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "specsense/simd/kernels.hpp"

namespace specsense::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void gemm_tile(std::size_t depth, const float* a, const float* b, float* c, std::size_t ldc,
               bool accumulate) {
  __m256 c00 = _mm256_setzero_ps(), c01 = _mm256_setzero_ps();
  __m256 c10 = _mm256_setzero_ps(), c11 = _mm256_setzero_ps();
  __m256 c20 = _mm256_setzero_ps(), c21 = _mm256_setzero_ps();
  __m256 c30 = _mm256_setzero_ps(), c31 = _mm256_setzero_ps();
  __m256 c40 = _mm256_setzero_ps(), c41 = _mm256_setzero_ps();
  __m256 c50 = _mm256_setzero_ps(), c51 = _mm256_setzero_ps();
  for (std::size_t p = 0; p < depth; ++p) {
    const __m256 b0 = _mm256_loadu_ps(b);
    const __m256 b1 = _mm256_loadu_ps(b + 8);
    __m256 ai = _mm256_broadcast_ss(a + 0);
    c00 = _mm256_fmadd_ps(ai, b0, c00);
    c01 = _mm256_fmadd_ps(ai, b1, c01);
    ai = _mm256_broadcast_ss(a + 1);
    c10 = _mm256_fmadd_ps(ai, b0, c10);
    c11 = _mm256_fmadd_ps(ai, b1, c11);
    ai = _mm256_broadcast_ss(a + 2);
    c20 = _mm256_fmadd_ps(ai, b0, c20);
    c21 = _mm256_fmadd_ps(ai, b1, c21);
    ai = _mm256_broadcast_ss(a + 3);
    c30 = _mm256_fmadd_ps(ai, b0, c30);
    c31 = _mm256_fmadd_ps(ai, b1, c31);
    ai = _mm256_broadcast_ss(a + 4);
    c40 = _mm256_fmadd_ps(ai, b0, c40);
    c41 = _mm256_fmadd_ps(ai, b1, c41);
    ai = _mm256_broadcast_ss(a + 5);
    c50 = _mm256_fmadd_ps(ai, b0, c50);
    c51 = _mm256_fmadd_ps(ai, b1, c51);
    a += kTileRows;
    b += kTileCols;
  }
  const auto store = [&](float* row, __m256 lo, __m256 hi) {
    if (accumulate) {
      lo = _mm256_add_ps(lo, _mm256_loadu_ps(row));
      hi = _mm256_add_ps(hi, _mm256_loadu_ps(row + 8));
    }
    _mm256_storeu_ps(row, lo);
    _mm256_storeu_ps(row + 8, hi);
  };
  store(c + 0 * ldc, c00, c01);
  store(c + 1 * ldc, c10, c11);
  store(c + 2 * ldc, c20, c21);
  store(c + 3 * ldc, c30, c31);
  store(c + 4 * ldc, c40, c41);
  store(c + 5 * ldc, c50, c51);
}

void norm2_f64(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = _mm256_loadu_pd(x + 2 * i);      // r0 i0 r1 i1
    const __m256d v1 = _mm256_loadu_pd(x + 2 * i + 4);  // r2 i2 r3 i3
    const __m256d s = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
    // hadd yields (n0, n2, n1, n3); restore order
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(s, 0xD8));
  }
  for (; i < n; ++i) out[i] = x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1];
}

void sum_sumsq(const float* x, std::size_t n, double* sum, double* sumsq) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  __m256d q0 = _mm256_setzero_pd(), q1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(v));
    const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1));
    s0 = _mm256_add_pd(s0, lo);
    s1 = _mm256_add_pd(s1, hi);
    q0 = _mm256_fmadd_pd(lo, lo, q0);
    q1 = _mm256_fmadd_pd(hi, hi, q1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  double q = hsum(_mm256_add_pd(q0, q1));
  for (; i < n; ++i) {
    const double v = x[i];
    s += v;
    q += v * v;
  }
  *sum = s;
  *sumsq = q;
}

void sum_dot(const float* x, const float* y, std::size_t n, double* sum_y, double* dot) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  __m256d d0 = _mm256_setzero_pd(), d1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 xv = _mm256_loadu_ps(x + i);
    const __m256 yv = _mm256_loadu_ps(y + i);
    const __m256d xl = _mm256_cvtps_pd(_mm256_castps256_ps128(xv));
    const __m256d xh = _mm256_cvtps_pd(_mm256_extractf128_ps(xv, 1));
    const __m256d yl = _mm256_cvtps_pd(_mm256_castps256_ps128(yv));
    const __m256d yh = _mm256_cvtps_pd(_mm256_extractf128_ps(yv, 1));
    s0 = _mm256_add_pd(s0, yl);
    s1 = _mm256_add_pd(s1, yh);
    d0 = _mm256_fmadd_pd(xl, yl, d0);
    d1 = _mm256_fmadd_pd(xh, yh, d1);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  double d = hsum(_mm256_add_pd(d0, d1));
  for (; i < n; ++i) {
    s += y[i];
    d += static_cast<double>(x[i]) * y[i];
  }
  *sum_y = s;
  *dot = d;
}

void affine(const float* x, float* y, std::size_t n, float scale, float shift, bool relu) {
  const __m256 vs = _mm256_set1_ps(scale);
  const __m256 vb = _mm256_set1_ps(shift);
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_fmadd_ps(vs, _mm256_loadu_ps(x + i), vb);
    if (relu) v = _mm256_max_ps(v, zero);
    _mm256_storeu_ps(y + i, v);
  }
  for (; i < n; ++i) {
    const float v = scale * x[i] + shift;
    y[i] = (relu && !(v > 0.0F)) ? 0.0F : v;
  }
}

void lincomb(const float* u, const float* v, float* out, std::size_t n, float a, float b, float c) {
  const __m256 va = _mm256_set1_ps(a), vb = _mm256_set1_ps(b), vc = _mm256_set1_ps(c);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 t = _mm256_fmadd_ps(vb, _mm256_loadu_ps(v + i), vc);
    _mm256_storeu_ps(out + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(u + i), t));
  }
  for (; i < n; ++i) out[i] = a * u[i] + b * v[i] + c;
}

void relu_backward(const float* y, float* dy, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(y + i), zero, _CMP_GT_OQ);
    _mm256_storeu_ps(dy + i, _mm256_and_ps(mask, _mm256_loadu_ps(dy + i)));
  }
  for (; i < n; ++i)
    if (!(y[i] > 0.0F)) dy[i] = 0.0F;
}

void axpy(float a, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void sgd_momentum(float* theta, float* velocity, const float* grad, std::size_t n, float lr,
                  float momentum) {
  const __m256 vm = _mm256_set1_ps(momentum);
  const __m256 vl = _mm256_set1_ps(lr);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_sub_ps(_mm256_mul_ps(vm, _mm256_loadu_ps(velocity + i)),
                                   _mm256_mul_ps(vl, _mm256_loadu_ps(grad + i)));
    _mm256_storeu_ps(velocity + i, v);
    _mm256_storeu_ps(theta + i, _mm256_add_ps(_mm256_loadu_ps(theta + i), v));
  }
  for (; i < n; ++i) {
    velocity[i] = momentum * velocity[i] - lr * grad[i];
    theta[i] += velocity[i];
  }
}

constexpr KernelTable kTable{
    Isa::avx2, gemm_tile, norm2_f64, sum_sumsq, sum_dot, affine, lincomb, relu_backward, axpy,
    sgd_momentum,
};

}  // namespace

const KernelTable& avx2_table() noexcept { return kTable; }

}  // namespace specsense::simd::detail
