#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

namespace specsense::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;
std::optional<Isa> parse_isa(std::string_view name) noexcept;

/// Register tile of the GEMM micro-kernel. Packed A panels are kTileRows wide,
/// packed B panels kTileCols wide; both variants share the packing layout.
inline constexpr std::size_t kTileRows = 6;
inline constexpr std::size_t kTileCols = 16;

struct KernelTable {
  Isa isa;

  /// c[i*ldc + j] (+)= sum_p a[p*6 + i] * b[p*16 + j] over the full 6x16 tile.
  void (*gemm_tile)(std::size_t depth, const float* a, const float* b, float* c, std::size_t ldc,
                    bool accumulate);

  /// out[i] = re^2 + im^2 for n interleaved complex doubles.
  void (*norm2_f64)(const double* interleaved, double* out, std::size_t n);

  /// Sum and sum of squares, accumulated in double.
  void (*sum_sumsq)(const float* x, std::size_t n, double* sum, double* sumsq);

  /// Sum of y and sum of x*y, accumulated in double.
  void (*sum_dot)(const float* x, const float* y, std::size_t n, double* sum_y, double* dot);

  /// y = scale*x + shift, optionally clamped at zero.
  void (*affine)(const float* x, float* y, std::size_t n, float scale, float shift, bool relu);

  /// out = a*u + b*v + c
  void (*lincomb)(const float* u, const float* v, float* out, std::size_t n, float a, float b, float c);

  /// dy[i] = y[i] > 0 ? dy[i] : 0
  void (*relu_backward)(const float* y, float* dy, std::size_t n);

  /// y += a*x
  void (*axpy)(float a, const float* x, float* y, std::size_t n);

  /// v = momentum*v - lr*g; theta += v
  void (*sgd_momentum)(float* theta, float* velocity, const float* grad, std::size_t n, float lr,
                       float momentum);
};

bool isa_available(Isa isa) noexcept;
/// Best ISA the running CPU supports, honoring SPECSENSE_ISA=scalar|avx2 when set.
Isa default_isa() noexcept;

/// Table for a specific ISA; throws DomainError when the CPU (or build) lacks it.
const KernelTable& kernels_for(Isa isa);
/// Active table used by the library's hot loops.
const KernelTable& kernels() noexcept;
void set_active_isa(Isa isa);
Isa active_isa() noexcept;

namespace detail {
const KernelTable& scalar_table() noexcept;
#if defined(SPECSENSE_HAVE_AVX2_TU)
const KernelTable& avx2_table() noexcept;
#endif
}  // namespace detail

}  // namespace specsense::simd
