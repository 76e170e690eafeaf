#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "specsense/error.hpp"
#include "specsense/fft.hpp"
#include "specsense/rng.hpp"
#include "specsense/sigsynth.hpp"

using namespace specsense;

namespace {

constexpr ModulationKind kAllKinds[] = {
    ModulationKind::bpsk,  ModulationKind::qpsk,  ModulationKind::psk8,  ModulationKind::fsk2,
    ModulationKind::fsk4,  ModulationKind::fsk8,  ModulationKind::qam16, ModulationKind::qam32,
    ModulationKind::qam64, ModulationKind::pam4,  ModulationKind::pam8,  ModulationKind::msk,
};

SynthesisConfig quiet_config() {
  SynthesisConfig cfg;
  cfg.cfo_min = 0.0;
  cfg.cfo_max = 0.0;
  cfg.random_phase = false;
  return cfg;
}

bool bit_equal(const ComplexFrame& a, const ComplexFrame& b) {
  return a.samples == b.samples && a.nominal_power == b.nominal_power;
}

}  // namespace

TEST_CASE("trained and held-out modulation sets") {
  const std::set<ModulationKind> trained(trained_kinds().begin(), trained_kinds().end());
  const std::set<ModulationKind> held(held_out_kinds().begin(), held_out_kinds().end());
  CHECK(trained == std::set<ModulationKind>{ModulationKind::bpsk, ModulationKind::qpsk, ModulationKind::fsk2,
                                            ModulationKind::fsk4, ModulationKind::qam16, ModulationKind::qam32,
                                            ModulationKind::pam4, ModulationKind::pam8});
  CHECK(held == std::set<ModulationKind>{ModulationKind::psk8, ModulationKind::fsk8, ModulationKind::qam64});
  CHECK(trained.count(ModulationKind::msk) == 0);
  CHECK(held.count(ModulationKind::msk) == 0);
  CHECK(trained_kinds().size() == 8);
  CHECK(held_out_kinds().size() == 3);
}

TEST_CASE("modulation names roundtrip") {
  for (auto kind : kAllKinds) {
    const auto parsed = parse_modulation(to_string(kind));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == kind);
  }
  CHECK(parse_modulation("16qam") == ModulationKind::qam16);
  CHECK_FALSE(parse_modulation("OFDM").has_value());
}

TEST_CASE("constellations have unit average energy") {
  const std::pair<ModulationKind, std::size_t> sizes[] = {
      {ModulationKind::bpsk, 2},   {ModulationKind::qpsk, 4},   {ModulationKind::psk8, 8},
      {ModulationKind::qam16, 16}, {ModulationKind::qam32, 32}, {ModulationKind::qam64, 64},
      {ModulationKind::pam4, 4},   {ModulationKind::pam8, 8},
  };
  for (const auto& [kind, m] : sizes) {
    CAPTURE(to_string(kind));
    const auto pts = constellation(kind);
    REQUIRE(pts.size() == m);
    double energy = 0.0;
    for (const auto& p : pts) energy += std::norm(p);
    CHECK(energy / static_cast<double>(m) == doctest::Approx(1.0).epsilon(1e-12));
    std::set<std::pair<double, double>> distinct;
    for (const auto& p : pts) distinct.insert({std::round(p.real() * 1e9), std::round(p.imag() * 1e9)});
    CHECK(distinct.size() == m);
  }
  CHECK_THROWS_AS(constellation(ModulationKind::fsk4), DomainError);
}

TEST_CASE("16QAM energy from enumerated grid") {
  // Raw grid {-3,-1,1,3}^2 has mean energy 10, so normalized points are grid/sqrt(10).
  const auto pts = constellation(ModulationKind::qam16);
  std::multiset<std::pair<long, long>> got, want;
  for (const auto& p : pts)
    got.insert({std::lround(p.real() * std::sqrt(10.0)), std::lround(p.imag() * std::sqrt(10.0))});
  for (int i : {-3, -1, 1, 3})
    for (int q : {-3, -1, 1, 3}) want.insert({i, q});
  CHECK(got == want);
}

TEST_CASE("PAM is real before rotation") {
  for (auto kind : {ModulationKind::pam4, ModulationKind::pam8}) {
    for (const auto& p : constellation(kind)) CHECK(p.imag() == 0.0);
    const auto frame = modulate(kind, quiet_config(), 3);
    for (const auto& s : frame.samples) CHECK(s.imag() == 0.0F);
  }
}

TEST_CASE("raised cosine taps have Nyquist zeros") {
  const auto taps = raised_cosine_taps(0.35, 4, 8);
  REQUIRE(taps.size() == 65);
  CHECK(taps[32] == doctest::Approx(1.0));
  for (int k = 1; k <= 4; ++k) {
    CHECK(std::abs(taps[static_cast<std::size_t>(32 + 8 * k)]) < 1e-12);
    CHECK(std::abs(taps[static_cast<std::size_t>(32 - 8 * k)]) < 1e-12);
  }
  for (std::size_t i = 0; i < taps.size(); ++i) CHECK(taps[i] == doctest::Approx(taps[taps.size() - 1 - i]));
  // the removable singularity at t = 1/(2 beta) stays finite
  const auto edge = raised_cosine_taps(0.5, 4, 8);
  for (double h : edge) CHECK(std::isfinite(h));
}

TEST_CASE("BPSK samples at symbol instants are antipodal up to filter gain") {
  const auto cfg = quiet_config();
  const auto taps = raised_cosine_taps(cfg.rc_rolloff, cfg.rc_span_symbols, cfg.oversampling);
  double energy = 0.0;
  for (double h : taps) energy += h * h;
  const double gain = 1.0 / std::sqrt(energy / cfg.oversampling);
  const auto frame = modulate(ModulationKind::bpsk, cfg, 42);
  int plus = 0;
  int minus = 0;
  for (int k = 0; k < cfg.symbols_per_frame; ++k) {
    const cdouble v = cdouble(frame.samples[static_cast<std::size_t>(k * cfg.oversampling)]) / gain;
    CHECK(std::abs(v.imag()) < 1e-6);
    CHECK(std::abs(std::abs(v.real()) - 1.0) < 1e-5);
    (v.real() > 0 ? plus : minus)++;
  }
  CHECK(plus > 0);
  CHECK(minus > 0);
}

TEST_CASE("every kind produces 512 finite samples") {
  SynthesisConfig cfg;
  for (auto kind : kAllKinds) {
    CAPTURE(to_string(kind));
    const auto f = modulate(kind, cfg, 11);
    CHECK(f.size() == 512);
    CHECK(f.nominal_power == 1.0);
    for (const auto& s : f.samples) CHECK((std::isfinite(s.real()) && std::isfinite(s.imag())));
  }
}

TEST_CASE("modulation is deterministic per seed") {
  SynthesisConfig cfg;
  for (auto kind : kAllKinds) {
    CHECK(bit_equal(modulate(kind, cfg, 99), modulate(kind, cfg, 99)));
    CHECK_FALSE(bit_equal(modulate(kind, cfg, 99), modulate(kind, cfg, 100)));
  }
}

TEST_CASE("average modulated power converges to one") {
  SynthesisConfig cfg;
  for (auto kind : kAllKinds) {
    CAPTURE(to_string(kind));
    double acc = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) acc += modulate(kind, cfg, derive_seed(5, {static_cast<std::uint64_t>(i)})).measured_power();
    CHECK(std::abs(acc / n - 1.0) < 0.02);
  }
}

TEST_CASE("FSK and MSK have constant envelope") {
  SynthesisConfig cfg;
  for (auto kind : {ModulationKind::fsk2, ModulationKind::fsk4, ModulationKind::fsk8, ModulationKind::msk}) {
    const auto f = modulate(kind, cfg, 8);
    for (const auto& s : f.samples) CHECK(std::abs(s) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("occupied band stays inside Nyquist at extreme CFO") {
  for (double cfo : {-0.1, 0.1}) {
    SynthesisConfig cfg;
    cfg.cfo_min = cfo;
    cfg.cfo_max = cfo;
    for (auto kind : kAllKinds) {
      CAPTURE(to_string(kind));
      CAPTURE(cfo);
      std::vector<double> psd(512, 0.0);
      for (int i = 0; i < 200; ++i) {
        const auto spec = fft::forward(modulate(kind, cfg, derive_seed(77, {static_cast<std::uint64_t>(i)})).samples);
        for (std::size_t k = 0; k < 512; ++k) psd[k] += std::norm(spec[k]);
      }
      double total = 0.0;
      double edge = 0.0;
      for (std::size_t k = 0; k < 512; ++k) {
        const double f = (k < 256 ? static_cast<double>(k) : static_cast<double>(k) - 512.0) / 512.0;
        total += psd[k];
        if (std::abs(f) > 0.45) edge += psd[k];
      }
      CHECK(edge / total < 0.01);
    }
  }
}

TEST_CASE("synthesis config validation") {
  SynthesisConfig ok;
  CHECK_NOTHROW(ok.validate());
  auto bad = ok;
  bad.frame_len = 500;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.rc_rolloff = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.rc_span_symbols = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.fsk_tone_spacing = 0.12;  // 3.5 * 0.12 + 0.1 > 0.5
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.cfo_min = -0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.cfo_min = 0.2;
  bad.cfo_max = 0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(modulate(ModulationKind::fsk8, bad, 1), ConfigError);
}

TEST_CASE("apply_cfo") {
  const auto f = modulate(ModulationKind::qpsk, SynthesisConfig{}, 4);
  CHECK(bit_equal(apply_cfo(f, 0.0), f));
  const auto g = apply_cfo(f, 0.1);
  for (std::size_t n = 0; n < f.size(); ++n)
    CHECK(std::abs(g.samples[n]) == doctest::Approx(std::abs(f.samples[n])).epsilon(1e-6));
  // n = 5 advances the phase by 2 pi * 0.5, negating the sample
  CHECK(std::abs(cdouble(g.samples[5]) + cdouble(f.samples[5])) < 1e-6);
  CHECK_THROWS_AS(apply_cfo(f, 0.5), DomainError);
  CHECK_THROWS_AS(apply_cfo(f, -0.7), DomainError);
}

TEST_CASE("white noise") {
  const auto zero = gen_white_noise(512, 0.0, 1);
  for (const auto& s : zero.samples) CHECK(s == cfloat{});
  CHECK_THROWS_AS(gen_white_noise(512, -1.0, 1), DomainError);

  double acc = 0.0;
  double re2 = 0.0;
  double im2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto f = gen_white_noise(512, 1.0, derive_seed(8, {static_cast<std::uint64_t>(i)}));
    acc += f.measured_power();
    for (const auto& s : f.samples) {
      re2 += double(s.real()) * s.real();
      im2 += double(s.imag()) * s.imag();
    }
  }
  CHECK(std::abs(acc / n - 1.0) < 0.01);
  CHECK(re2 / (n * 512.0) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(im2 / (n * 512.0) == doctest::Approx(0.5).epsilon(0.01));

  const auto a = gen_white_noise(512, 1.0, 1001);
  const auto b = gen_white_noise(512, 1.0, 1002);
  cdouble cross{};
  for (std::size_t i = 0; i < 512; ++i) cross += cdouble(a.samples[i]) * std::conj(cdouble(b.samples[i]));
  CHECK(std::abs(cross) / std::sqrt(a.measured_power() * 512 * b.measured_power() * 512) < 0.1);
}

TEST_CASE("pink noise") {
  for (const auto& s : gen_pink_noise(512, 0.0, 1).samples) CHECK(s == cfloat{});
  CHECK_THROWS_AS(gen_pink_noise(500, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(gen_pink_noise(512, -1.0, 1), DomainError);

  for (double p : {0.25, 1.0, 7.0})
    CHECK(gen_pink_noise(512, p, 3).measured_power() == doctest::Approx(p).epsilon(1e-6));

  // log-log slope of the averaged periodogram over bins 32..128 (two octaves)
  std::vector<double> psd(512, 0.0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto spec = fft::forward(gen_pink_noise(512, 1.0, derive_seed(12, {static_cast<std::uint64_t>(i)})).samples);
    for (std::size_t k = 0; k < 512; ++k) psd[k] += std::norm(spec[k]);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int d = 32; d <= 128; ++d) {
    const double x = std::log(static_cast<double>(d));
    for (int k : {d, 512 - d}) {
      const double y = std::log(psd[static_cast<std::size_t>(k)]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(std::abs(slope + 1.0) < 0.1);
}

TEST_CASE("noise uncertainty keeps realized power in [P/a, aP]") {
  NoiseSpec spec;
  spec.power = 2.0;
  spec.uncertainty_factor = std::pow(10.0, 0.2);
  double lo = 1e9, hi = 0;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    spec.kind = i % 2 ? NoiseKind::pink : NoiseKind::white;
    const auto f = gen_noise(spec, 512, derive_seed(3, {i}));
    CHECK(f.nominal_power == 2.0);
    if (spec.kind == NoiseKind::pink) {
      const double p = f.measured_power();
      CHECK(p >= 2.0 / spec.uncertainty_factor * (1 - 1e-6));
      CHECK(p <= 2.0 * spec.uncertainty_factor * (1 + 1e-6));
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
  }
  CHECK(lo < 2.0 / std::pow(10.0, 0.15));
  CHECK(hi > 2.0 * std::pow(10.0, 0.15));
  spec.uncertainty_factor = 0.9;
  CHECK_THROWS_AS(gen_noise(spec, 512, 1), DomainError);
}

TEST_CASE("mix scales the signal to the requested SNR") {
  SynthesisConfig cfg;
  const auto s = modulate(ModulationKind::qpsk, cfg, 1);
  const auto w = gen_white_noise(512, 1.0, 2);
  const auto r0 = mix(s, w, 0.0);
  const auto r20 = mix(s, w, -20.0);
  for (std::size_t i = 0; i < 512; ++i) {
    const cdouble a0 = cdouble(r0.samples[i]) - cdouble(w.samples[i]);
    const cdouble a20 = cdouble(r20.samples[i]) - cdouble(w.samples[i]);
    CHECK(std::abs(a0 - cdouble(s.samples[i])) < 1e-5);
    CHECK(std::abs(a20 - 0.1 * cdouble(s.samples[i])) < 1e-5);
  }
  CHECK(r0.nominal_power == doctest::Approx(2.0));

  double ps = 0.0, pw = 0.0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto sig = modulate(ModulationKind::bpsk, cfg, derive_seed(20, {i, 1}));
    const auto noise = gen_white_noise(512, 1.0, derive_seed(20, {i, 2}));
    const auto r = mix(sig, noise, 10.0);
    for (std::size_t k = 0; k < 512; ++k) {
      ps += std::norm(cdouble(r.samples[k]) - cdouble(noise.samples[k]));
      pw += std::norm(cdouble(noise.samples[k]));
    }
  }
  CHECK(std::abs(10.0 * std::log10(ps / pw) - 10.0) < 0.2);

  ComplexFrame short_noise = gen_white_noise(256, 1.0, 1);
  CHECK_THROWS_AS(mix(s, short_noise, 0.0), DomainError);
}

TEST_CASE("derive_seed separates domains and paths") {
  std::set<std::uint64_t> seen;
  for (auto d : {SeedDomain::train_data, SeedDomain::test_data, SeedDomain::calibration_data,
                 SeedDomain::evaluation})
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(1, d, {i}));
  CHECK(seen.size() == 400);
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CounterRng a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
}
