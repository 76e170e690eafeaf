#include "specsense/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "specsense/error.hpp"

namespace specsense::fft {
namespace {

struct Plan {
  std::vector<std::size_t> bitrev;
  std::vector<std::complex<double>> twiddle;  // e^{-2 pi i k / n}, k < n/2
};

const Plan& plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<Plan>> plans;
  std::lock_guard lock(mu);
  auto& slot = plans[n];
  if (!slot) {
    auto p = std::make_unique<Plan>();
    p->bitrev.resize(n);
    int bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
      p->bitrev[i] = r;
    }
    p->twiddle.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      p->twiddle[k] = {std::cos(a), std::sin(a)};
    }
    slot = std::move(p);
  }
  return *slot;
}

}  // namespace

void transform(std::span<std::complex<double>> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw DomainError("fft length must be a power of two");
  if (n == 1) return;
  const Plan& plan = plan_for(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = plan.bitrev[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> w = plan.twiddle[k * step];
        if (inverse) w = std::conj(w);
        const auto u = data[start + k];
        const auto v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> forward(std::span<const std::complex<float>> x) {
  std::vector<std::complex<double>> out(x.begin(), x.end());
  transform(out, false);
  return out;
}

}  // namespace specsense::fft
