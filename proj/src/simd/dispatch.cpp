#include <atomic>
#include <cctype>
#include <cstdlib>
#include <string>

#include "specsense/error.hpp"
#include "specsense/simd/kernels.hpp"

namespace specsense::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(SPECSENSE_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&kernels_for(default_isa())};
  return slot;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept { return isa == Isa::scalar ? "scalar" : "avx2"; }

std::optional<Isa> parse_isa(std::string_view name) noexcept {
  std::string s(name);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "scalar") return Isa::scalar;
  if (s == "avx2") return Isa::avx2;
  return std::nullopt;
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return cpu_has_avx2();
  }
  return false;
}

Isa default_isa() noexcept {
  if (const char* env = std::getenv("SPECSENSE_ISA")) {
    if (auto req = parse_isa(env); req && isa_available(*req)) return *req;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa)) throw DomainError("ISA " + std::string(to_string(isa)) + " is not available");
#if defined(SPECSENSE_HAVE_AVX2_TU)
  if (isa == Isa::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

const KernelTable& kernels() noexcept { return *active_slot().load(std::memory_order_acquire); }

void set_active_isa(Isa isa) { active_slot().store(&kernels_for(isa), std::memory_order_release); }

Isa active_isa() noexcept { return kernels().isa; }

}  // namespace specsense::simd
