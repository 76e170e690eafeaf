#include "specsense/sigsynth.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "specsense/error.hpp"
#include "specsense/fft.hpp"
#include "specsense/rng.hpp"

namespace specsense {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr std::array<ModulationKind, 8> kTrained = {
    ModulationKind::bpsk,  ModulationKind::qpsk,  ModulationKind::fsk2, ModulationKind::fsk4,
    ModulationKind::qam16, ModulationKind::qam32, ModulationKind::pam4, ModulationKind::pam8,
};
constexpr std::array<ModulationKind, 3> kHeldOut = {
    ModulationKind::psk8, ModulationKind::fsk8, ModulationKind::qam64,
};

struct KindName {
  ModulationKind kind;
  std::string_view name;
};
constexpr std::array<KindName, 12> kNames = {{
    {ModulationKind::bpsk, "BPSK"},   {ModulationKind::qpsk, "QPSK"},
    {ModulationKind::psk8, "8PSK"},   {ModulationKind::fsk2, "2FSK"},
    {ModulationKind::fsk4, "4FSK"},   {ModulationKind::fsk8, "8FSK"},
    {ModulationKind::qam16, "16QAM"}, {ModulationKind::qam32, "32QAM"},
    {ModulationKind::qam64, "64QAM"}, {ModulationKind::pam4, "4PAM"},
    {ModulationKind::pam8, "8PAM"},   {ModulationKind::msk, "MSK"},
}};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

int fsk_order(ModulationKind kind) {
  switch (kind) {
    case ModulationKind::fsk2: return 2;
    case ModulationKind::fsk4: return 4;
    case ModulationKind::fsk8: return 8;
    case ModulationKind::msk: return 2;
    default: return 0;
  }
}

std::vector<cdouble> square_qam(int side) {
  std::vector<cdouble> pts;
  for (int i = 0; i < side; ++i)
    for (int q = 0; q < side; ++q) pts.emplace_back(2 * i - side + 1, 2 * q - side + 1);
  return pts;
}

void normalize_energy(std::vector<cdouble>& pts) {
  double e = 0.0;
  for (const auto& p : pts) e += std::norm(p);
  const double g = 1.0 / std::sqrt(e / static_cast<double>(pts.size()));
  for (auto& p : pts) p *= g;
}

ComplexFrame to_frame(const std::vector<cdouble>& x, double nominal_power) {
  ComplexFrame f;
  f.samples.resize(x.size());
  std::transform(x.begin(), x.end(), f.samples.begin(), [](cdouble v) { return cfloat(v); });
  f.nominal_power = nominal_power;
  return f;
}

}  // namespace

std::string_view to_string(ModulationKind kind) noexcept {
  for (const auto& kn : kNames)
    if (kn.kind == kind) return kn.name;
  return "?";
}

std::optional<ModulationKind> parse_modulation(std::string_view name) noexcept {
  const std::string u = upper(name);
  for (const auto& kn : kNames)
    if (kn.name == u) return kn.kind;
  return std::nullopt;
}

std::span<const ModulationKind> trained_kinds() noexcept { return kTrained; }
std::span<const ModulationKind> held_out_kinds() noexcept { return kHeldOut; }

bool is_linear(ModulationKind kind) noexcept { return fsk_order(kind) == 0; }

std::vector<cdouble> constellation(ModulationKind kind) {
  std::vector<cdouble> pts;
  switch (kind) {
    case ModulationKind::bpsk: pts = {{1, 0}, {-1, 0}}; break;
    case ModulationKind::qpsk:
      for (int m = 0; m < 4; ++m) pts.push_back(std::polar(1.0, std::numbers::pi / 4 * (2 * m + 1)));
      break;
    case ModulationKind::psk8:
      for (int m = 0; m < 8; ++m) pts.push_back(std::polar(1.0, std::numbers::pi / 4 * m));
      break;
    case ModulationKind::qam16: pts = square_qam(4); break;
    case ModulationKind::qam64: pts = square_qam(8); break;
    case ModulationKind::qam32:
      // 6x6 grid minus the four corners
      for (const auto& p : square_qam(6))
        if (!(std::abs(p.real()) == 5 && std::abs(p.imag()) == 5)) pts.push_back(p);
      break;
    case ModulationKind::pam4:
      for (int m = 0; m < 4; ++m) pts.emplace_back(2 * m - 3, 0);
      break;
    case ModulationKind::pam8:
      for (int m = 0; m < 8; ++m) pts.emplace_back(2 * m - 7, 0);
      break;
    default: throw DomainError(std::string(to_string(kind)) + " has no linear constellation");
  }
  normalize_energy(pts);
  return pts;
}

std::string_view to_string(NoiseKind kind) noexcept {
  return kind == NoiseKind::white ? "white" : "pink";
}

std::optional<NoiseKind> parse_noise_kind(std::string_view name) noexcept {
  const std::string u = upper(name);
  if (u == "WHITE" || u == "AWGN") return NoiseKind::white;
  if (u == "PINK") return NoiseKind::pink;
  return std::nullopt;
}

void SynthesisConfig::validate() const {
  if (frame_len <= 0 || symbols_per_frame <= 0 || oversampling <= 0)
    throw ConfigError("frame length, symbol count and oversampling must be positive");
  if (frame_len != symbols_per_frame * oversampling)
    throw ConfigError("frame_len must equal symbols_per_frame * oversampling");
  if (!(rc_rolloff > 0.0 && rc_rolloff <= 1.0)) throw ConfigError("rc_rolloff must lie in (0, 1]");
  if (rc_span_symbols <= 0) throw ConfigError("rc_span_symbols must be positive");
  if (!(cfo_min <= cfo_max) || cfo_min <= -0.5 || cfo_max >= 0.5)
    throw ConfigError("cfo range must be an interval inside (-0.5, 0.5)");
  if (!(fsk_tone_spacing > 0.0)) throw ConfigError("fsk_tone_spacing must be positive");
  const double max_cfo = std::max(std::abs(cfo_min), std::abs(cfo_max));
  const double max_tone = 3.5 * fsk_tone_spacing;  // outermost 8FSK tone
  if (max_tone + max_cfo >= 0.5) throw ConfigError("FSK tones plus CFO would alias past Nyquist");
  if (msk_oversampling <= 0 || frame_len % msk_oversampling != 0)
    throw ConfigError("msk_oversampling must divide frame_len");
}

double ComplexFrame::measured_power() const noexcept {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += std::norm(cdouble(s));
  return acc / static_cast<double>(samples.size());
}

std::vector<double> raised_cosine_taps(double rolloff, int span_symbols, int oversampling) {
  const int half = span_symbols * oversampling;
  std::vector<double> taps(static_cast<std::size_t>(2 * half + 1));
  for (int i = -half; i <= half; ++i) {
    const double t = static_cast<double>(i) / oversampling;
    double h;
    const double denom = 1.0 - (2.0 * rolloff * t) * (2.0 * rolloff * t);
    const auto sinc = [](double x) {
      return x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    };
    if (std::abs(denom) < 1e-12) {
      h = std::numbers::pi / 4.0 * sinc(1.0 / (2.0 * rolloff));
    } else {
      h = sinc(t) * std::cos(std::numbers::pi * rolloff * t) / denom;
    }
    taps[static_cast<std::size_t>(i + half)] = h;
  }
  return taps;
}

ComplexFrame modulate(ModulationKind kind, const SynthesisConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  CounterRng rng(seed);
  const auto n_out = static_cast<std::size_t>(cfg.frame_len);
  std::vector<cdouble> base(n_out);

  if (is_linear(kind)) {
    const auto pts = constellation(kind);
    const int osr = cfg.oversampling;
    const int span = cfg.rc_span_symbols;
    const auto taps = raised_cosine_taps(cfg.rc_rolloff, span, osr);
    double tap_energy = 0.0;
    for (double h : taps) tap_energy += h * h;
    // E|y|^2 averaged over one symbol period is sum(h^2)/osr for unit-energy symbols
    const double gain = 1.0 / std::sqrt(tap_energy / osr);

    const int n_sym = cfg.symbols_per_frame + 2 * span;
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    std::vector<cdouble> sym(static_cast<std::size_t>(n_sym));
    for (auto& s : sym) s = pts[pick(rng)];

    const int half = span * osr;
    for (int n = 0; n < cfg.frame_len; ++n) {
      const int m = n + half;  // position on the guarded symbol grid
      cdouble acc{0.0, 0.0};
      const int k_lo = std::max(0, (m - half + osr - 1) / osr);
      const int k_hi = std::min(n_sym - 1, (m + half) / osr);
      for (int k = k_lo; k <= k_hi; ++k) {
        acc += sym[static_cast<std::size_t>(k)] * taps[static_cast<std::size_t>(m - k * osr + half)];
      }
      base[static_cast<std::size_t>(n)] = acc * gain;
    }
  } else {
    const int order = fsk_order(kind);
    int osr = cfg.oversampling;
    double spacing = cfg.fsk_tone_spacing;
    if (kind == ModulationKind::msk) {
      osr = cfg.msk_oversampling;
      spacing = 0.5 / osr;  // modulation index 1/2
    }
    std::uniform_int_distribution<int> pick(0, order - 1);
    double phase = 0.0;
    const int n_sym = cfg.frame_len / osr;
    std::size_t n = 0;
    for (int s = 0; s < n_sym; ++s) {
      const double f = (pick(rng) - (order - 1) / 2.0) * spacing;
      for (int i = 0; i < osr; ++i) {
        base[n++] = std::polar(1.0, phase);
        phase = std::fmod(phase + kTwoPi * f, kTwoPi);
      }
    }
  }

  std::uniform_real_distribution<double> cfo_dist(cfg.cfo_min, cfg.cfo_max);
  const double cfo = cfg.cfo_min == cfg.cfo_max ? cfg.cfo_min : cfo_dist(rng);
  const double phase0 = cfg.random_phase ? kTwoPi * rng.uniform() : 0.0;
  for (std::size_t n = 0; n < n_out; ++n) {
    const double ph = std::fmod(kTwoPi * cfo * static_cast<double>(n), kTwoPi) + phase0;
    base[n] *= std::polar(1.0, ph);
  }
  return to_frame(base, 1.0);
}

ComplexFrame apply_cfo(const ComplexFrame& frame, double f_norm) {
  if (!(std::abs(f_norm) < 0.5)) throw DomainError("normalized CFO must satisfy |f| < 0.5");
  ComplexFrame out = frame;
  if (f_norm == 0.0) return out;
  for (std::size_t n = 0; n < out.samples.size(); ++n) {
    const double ph = std::fmod(kTwoPi * f_norm * static_cast<double>(n), kTwoPi);
    out.samples[n] = cfloat(cdouble(frame.samples[n]) * std::polar(1.0, ph));
  }
  return out;
}

ComplexFrame gen_white_noise(std::size_t len, double power, std::uint64_t seed) {
  if (!(power >= 0.0)) throw DomainError("noise power must be non-negative");
  ComplexFrame f;
  f.samples.assign(len, cfloat{0.0F, 0.0F});
  f.nominal_power = power;
  if (power == 0.0) return f;
  CounterRng rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(power / 2.0));
  for (auto& s : f.samples) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    s = cfloat(static_cast<float>(re), static_cast<float>(im));
  }
  return f;
}

ComplexFrame gen_pink_noise(std::size_t len, double power, std::uint64_t seed) {
  if (!fft::is_power_of_two(len)) throw ConfigError("pink noise length must be a power of two");
  if (!(power >= 0.0)) throw DomainError("noise power must be non-negative");
  ComplexFrame f;
  f.samples.assign(len, cfloat{0.0F, 0.0F});
  f.nominal_power = power;
  if (power == 0.0) return f;

  CounterRng rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<cdouble> x(len);
  for (auto& v : x) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v = {re, im};
  }
  fft::transform(x, false);
  const double n = static_cast<double>(len);
  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t dist = std::min(k, len - k);
    const double freq = static_cast<double>(std::max<std::size_t>(dist, 1)) / n;
    x[k] *= std::sqrt(1.0 / freq);
  }
  fft::transform(x, true);
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  const double scale = std::sqrt(power / (acc / n));
  for (std::size_t i = 0; i < len; ++i) f.samples[i] = cfloat(x[i] * scale);
  return f;
}

ComplexFrame gen_noise(const NoiseSpec& spec, std::size_t len, std::uint64_t seed) {
  if (!(spec.uncertainty_factor >= 1.0)) throw DomainError("noise uncertainty factor must be >= 1");
  double realized = spec.power;
  std::uint64_t noise_seed = seed;
  if (spec.uncertainty_factor > 1.0) {
    CounterRng rng(derive_seed(seed, {0x756e63ULL}));
    const double span_db = 10.0 * std::log10(spec.uncertainty_factor);
    const double offset_db = span_db * (2.0 * rng.uniform() - 1.0);
    realized = spec.power * std::pow(10.0, offset_db / 10.0);
  }
  ComplexFrame f = spec.kind == NoiseKind::white ? gen_white_noise(len, realized, noise_seed)
                                                 : gen_pink_noise(len, realized, noise_seed);
  f.nominal_power = spec.power;
  return f;
}

ComplexFrame mix(const ComplexFrame& signal, const ComplexFrame& noise, double snr_db) {
  if (signal.size() != noise.size())
    throw DomainError("signal and noise frames differ in length");
  if (!(signal.nominal_power > 0.0)) throw DomainError("signal nominal power must be positive");
  const double h = std::sqrt(std::pow(10.0, snr_db / 10.0) * noise.nominal_power / signal.nominal_power);
  ComplexFrame out;
  out.samples.resize(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    out.samples[i] = cfloat(h * cdouble(signal.samples[i]) + cdouble(noise.samples[i]));
  }
  out.nominal_power = h * h * signal.nominal_power + noise.nominal_power;
  return out;
}

}  // namespace specsense
