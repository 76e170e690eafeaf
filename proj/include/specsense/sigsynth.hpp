#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace specsense {

using cfloat = std::complex<float>;
using cdouble = std::complex<double>;

enum class ModulationKind {
  bpsk, qpsk, psk8, fsk2, fsk4, fsk8, qam16, qam32, qam64, pam4, pam8, msk,
};

std::string_view to_string(ModulationKind kind) noexcept;
/// Accepts the canonical names ("BPSK", "8PSK", "16QAM", ...), case-insensitive.
std::optional<ModulationKind> parse_modulation(std::string_view name) noexcept;

/// Kinds the detector network is trained on.
std::span<const ModulationKind> trained_kinds() noexcept;
/// Kinds reserved for the generalization test; never in training data.
std::span<const ModulationKind> held_out_kinds() noexcept;
bool is_linear(ModulationKind kind) noexcept;

/// Unit-average-energy constellation of a linear modulation (PSK, QAM, PAM).
std::vector<cdouble> constellation(ModulationKind kind);

struct SynthesisConfig {
  int frame_len = 512;
  int symbols_per_frame = 64;
  int oversampling = 8;
  double rc_rolloff = 0.35;
  int rc_span_symbols = 4;
  double cfo_min = -0.1;
  double cfo_max = 0.1;
  double fsk_tone_spacing = 1.0 / 16.0;
  bool random_phase = true;
  // The transfer-learning surrogate runs at a lower symbol rate than the training set.
  int msk_oversampling = 16;

  /// Throws ConfigError when the configuration is inconsistent or would alias.
  void validate() const;
};

struct ComplexFrame {
  std::vector<cfloat> samples;
  double nominal_power = 1.0;

  std::size_t size() const noexcept { return samples.size(); }
  /// Mean |x|^2 over the samples actually present.
  double measured_power() const noexcept;
};

enum class NoiseKind { white, pink };
std::string_view to_string(NoiseKind kind) noexcept;
std::optional<NoiseKind> parse_noise_kind(std::string_view name) noexcept;

struct NoiseSpec {
  NoiseKind kind = NoiseKind::white;
  double power = 1.0;
  double uncertainty_factor = 1.0;  // a >= 1; realized power in [P/a, aP]
};

/// Raised-cosine impulse response sampled at `oversampling` samples per symbol,
/// truncated to +-span symbols. Peak value 1 at the centre tap.
std::vector<double> raised_cosine_taps(double rolloff, int span_symbols, int oversampling);

ComplexFrame modulate(ModulationKind kind, const SynthesisConfig& cfg, std::uint64_t seed);
ComplexFrame apply_cfo(const ComplexFrame& frame, double f_norm);
ComplexFrame gen_white_noise(std::size_t len, double power, std::uint64_t seed);
ComplexFrame gen_pink_noise(std::size_t len, double power, std::uint64_t seed);
ComplexFrame gen_noise(const NoiseSpec& spec, std::size_t len, std::uint64_t seed);
/// r = h*s + w with h > 0 chosen so that nominal signal power over noise power is 10^(snr/10).
ComplexFrame mix(const ComplexFrame& signal, const ComplexFrame& noise, double snr_db);

}  // namespace specsense
