#include "specsense/featurize.hpp"

#include <algorithm>
#include <cmath>

#include "specsense/error.hpp"
#include "specsense/fft.hpp"
#include "specsense/simd/kernels.hpp"

namespace specsense {
namespace {

void spectrum_into(const ComplexFrame& frame, FeatureConvention conv, double rms_scale, float* out) {
  const std::size_t n = frame.size();
  if (n != kFeatureLength)
    throw DomainError("power spectrum expects a frame of " + std::to_string(kFeatureLength) +
                      " samples, got " + std::to_string(n));
  std::vector<cdouble> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = cdouble(frame.samples[i]) * rms_scale;
  fft::transform(x, false);

  // |X|^2 / N; the shift moves DC to index n/2
  std::vector<double> interleaved(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    interleaved[2 * i] = x[i].real();
    interleaved[2 * i + 1] = x[i].imag();
  }
  std::vector<double> mag2(n);
  simd::kernels().norm2_f64(interleaved.data(), mag2.data(), n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t dst = conv.shifted ? (k + n / 2) % n : k;
    double p = mag2[k] * inv_n;
    if (conv.scale == SpectrumScale::db) p = 10.0 * std::log10(std::max(p, 1e-12));
    out[dst] = static_cast<float>(p);
  }
}

double rms_of(const ComplexFrame& frame) {
  const double p = frame.measured_power();
  if (!(p > 0.0) || !std::isfinite(p))
    throw DegenerateInputError("cannot normalize a frame with zero or non-finite energy");
  return std::sqrt(p);
}

}  // namespace

std::string_view to_string(SpectrumScale scale) noexcept {
  return scale == SpectrumScale::linear ? "linear" : "db";
}

ComplexFrame normalize_power(const ComplexFrame& frame) {
  const double inv = 1.0 / rms_of(frame);
  ComplexFrame out;
  out.samples.resize(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) out.samples[i] = cfloat(cdouble(frame.samples[i]) * inv);
  out.nominal_power = 1.0;
  return out;
}

PowerSpectrumVector power_spectrum(const ComplexFrame& frame, FeatureConvention conv) {
  PowerSpectrumVector v;
  v.bins.resize(kFeatureLength);
  v.scale = conv.scale;
  v.shifted = conv.shifted;
  spectrum_into(frame, conv, 1.0, v.bins.data());
  return v;
}

PowerSpectrumVector featurize(const ComplexFrame& frame, FeatureConvention conv) {
  PowerSpectrumVector v;
  v.bins.resize(kFeatureLength);
  v.scale = conv.scale;
  v.shifted = conv.shifted;
  featurize_into(frame, conv, v.bins.data());
  return v;
}

void featurize_into(const ComplexFrame& frame, FeatureConvention conv, float* out) {
  // Normalization is folded into the transform input; the result matches
  // power_spectrum(normalize_power(frame)) without the intermediate float rounding.
  spectrum_into(frame, conv, 1.0 / rms_of(frame), out);
}

}  // namespace specsense
