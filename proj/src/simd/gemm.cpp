#include "specsense/simd/gemm.hpp"

#include <algorithm>
#include <vector>

namespace specsense::simd {
namespace {

constexpr std::size_t MR = kTileRows;
constexpr std::size_t NR = kTileCols;
constexpr std::size_t KC = 256;
constexpr std::size_t MC = 96;
constexpr std::size_t NC = 2048;

template <typename T>
using TileFn = void (*)(std::size_t, const T*, const T*, T*, std::size_t, bool);

void tile_f64(std::size_t depth, const double* a, const double* b, double* c, std::size_t ldc,
              bool accumulate) {
  double acc[MR][NR] = {};
  for (std::size_t p = 0; p < depth; ++p) {
    for (std::size_t i = 0; i < MR; ++i)
      for (std::size_t j = 0; j < NR; ++j) acc[i][j] += a[i] * b[j];
    a += MR;
    b += NR;
  }
  for (std::size_t i = 0; i < MR; ++i)
    for (std::size_t j = 0; j < NR; ++j) c[i * ldc + j] = accumulate ? c[i * ldc + j] + acc[i][j] : acc[i][j];
}

// Packs rows [i0, i0+mc) x cols [p0, p0+kc) of A into MR-row slivers, zero-padded.
template <typename T>
void pack_a(MatrixView<T> a, std::size_t i0, std::size_t mc, std::size_t p0, std::size_t kc, T* out) {
  for (std::size_t ir = 0; ir < mc; ir += MR) {
    const std::size_t rows = std::min(MR, mc - ir);
    for (std::size_t p = 0; p < kc; ++p) {
      for (std::size_t i = 0; i < rows; ++i) out[i] = a(i0 + ir + i, p0 + p);
      for (std::size_t i = rows; i < MR; ++i) out[i] = T(0);
      out += MR;
    }
  }
}

template <typename T>
void pack_b(MatrixView<T> b, std::size_t p0, std::size_t kc, std::size_t j0, std::size_t nc, T* out) {
  for (std::size_t jr = 0; jr < nc; jr += NR) {
    const std::size_t cols = std::min(NR, nc - jr);
    if (cols == NR && b.col_stride == 1) {
      for (std::size_t p = 0; p < kc; ++p) {
        const T* src = &b(p0 + p, j0 + jr);
        std::copy(src, src + NR, out);
        out += NR;
      }
    } else {
      for (std::size_t p = 0; p < kc; ++p) {
        for (std::size_t j = 0; j < cols; ++j) out[j] = b(p0 + p, j0 + jr + j);
        for (std::size_t j = cols; j < NR; ++j) out[j] = T(0);
        out += NR;
      }
    }
  }
}

template <typename T>
void gemm_impl(std::size_t m, std::size_t n, std::size_t k, MatrixView<T> a, MatrixView<T> b, T* c,
               std::size_t ldc, bool accumulate, TileFn<T> tile) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (!accumulate)
      for (std::size_t i = 0; i < m; ++i) std::fill(c + i * ldc, c + i * ldc + n, T(0));
    return;
  }
  thread_local std::vector<T> a_pack;
  thread_local std::vector<T> b_pack;
  a_pack.resize(MC * KC);
  b_pack.resize(NC * KC);
  T edge[MR * NR];

  for (std::size_t jc = 0; jc < n; jc += NC) {
    const std::size_t nc = std::min(NC, n - jc);
    for (std::size_t pc = 0; pc < k; pc += KC) {
      const std::size_t kc = std::min(KC, k - pc);
      const bool acc = accumulate || pc > 0;
      pack_b(b, pc, kc, jc, nc, b_pack.data());
      for (std::size_t ic = 0; ic < m; ic += MC) {
        const std::size_t mc = std::min(MC, m - ic);
        pack_a(a, ic, mc, pc, kc, a_pack.data());
        for (std::size_t jr = 0; jr < nc; jr += NR) {
          const std::size_t cols = std::min(NR, nc - jr);
          const T* bp = b_pack.data() + jr * kc;
          for (std::size_t ir = 0; ir < mc; ir += MR) {
            const std::size_t rows = std::min(MR, mc - ir);
            const T* ap = a_pack.data() + ir * kc;
            T* cp = c + (ic + ir) * ldc + jc + jr;
            if (rows == MR && cols == NR) {
              tile(kc, ap, bp, cp, ldc, acc);
            } else {
              tile(kc, ap, bp, edge, NR, false);
              for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j)
                  cp[i * ldc + j] = acc ? cp[i * ldc + j] + edge[i * NR + j] : edge[i * NR + j];
            }
          }
        }
      }
    }
  }
}

}  // namespace

void gemm(std::size_t m, std::size_t n, std::size_t k, MatrixView<float> a, MatrixView<float> b,
          float* c, std::size_t ldc, bool accumulate, const KernelTable& table) {
  gemm_impl<float>(m, n, k, a, b, c, ldc, accumulate, table.gemm_tile);
}

void gemm(std::size_t m, std::size_t n, std::size_t k, MatrixView<float> a, MatrixView<float> b,
          float* c, std::size_t ldc, bool accumulate) {
  gemm(m, n, k, a, b, c, ldc, accumulate, kernels());
}

void gemm(std::size_t m, std::size_t n, std::size_t k, MatrixView<double> a, MatrixView<double> b,
          double* c, std::size_t ldc, bool accumulate) {
  gemm_impl<double>(m, n, k, a, b, c, ldc, accumulate, tile_f64);
}

}  // namespace specsense::simd
