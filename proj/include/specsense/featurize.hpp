#pragma once

#include <string_view>
#include <vector>

#include "specsense/sigsynth.hpp"

namespace specsense {

enum class SpectrumScale { linear, db };

/// Frozen into model and dataset headers so training and inference agree.
struct FeatureConvention {
  SpectrumScale scale = SpectrumScale::linear;
  bool shifted = true;  // DC at index n/2

  bool operator==(const FeatureConvention&) const = default;
};

std::string_view to_string(SpectrumScale scale) noexcept;

struct PowerSpectrumVector {
  std::vector<float> bins;
  SpectrumScale scale = SpectrumScale::linear;
  bool shifted = true;
};

inline constexpr std::size_t kFeatureLength = 512;

/// Divides every sample by the frame RMS. Throws DegenerateInputError on an all-zero frame.
ComplexFrame normalize_power(const ComplexFrame& frame);

/// Periodogram |DFT(x)|^2 / N, no window. Sum of linear bins equals N times the mean power.
PowerSpectrumVector power_spectrum(const ComplexFrame& frame, FeatureConvention conv = {});

/// normalize_power followed by power_spectrum: the network input pipeline.
PowerSpectrumVector featurize(const ComplexFrame& frame, FeatureConvention conv = {});

/// Writes the feature straight into `out` (length kFeatureLength) for batch assembly.
void featurize_into(const ComplexFrame& frame, FeatureConvention conv, float* out);

}  // namespace specsense
