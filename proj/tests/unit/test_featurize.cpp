#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "specsense/error.hpp"
#include "specsense/featurize.hpp"
#include "specsense/rng.hpp"
#include "specsense/sigsynth.hpp"

using namespace specsense;

namespace {

ComplexFrame tone(int bin, double amplitude = 1.0) {
  ComplexFrame f;
  f.samples.resize(512);
  for (int n = 0; n < 512; ++n)
    f.samples[static_cast<std::size_t>(n)] =
        cfloat(std::polar(amplitude, 2.0 * std::numbers::pi * bin * n / 512.0));
  return f;
}

ComplexFrame scaled(const ComplexFrame& f, cdouble c) {
  ComplexFrame out = f;
  for (auto& s : out.samples) s = cfloat(cdouble(s) * c);
  return out;
}

double sum(const std::vector<float>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("tone lands in one DC-centred bin") {
  for (int k : {0, 1, 17, 100, 255, -256, -3}) {
    CAPTURE(k);
    const auto p = power_spectrum(tone(k));
    REQUIRE(p.bins.size() == 512);
    const std::size_t pos = static_cast<std::size_t>((k + 256 + 512) % 512);
    CHECK(p.bins[pos] == doctest::Approx(512.0).epsilon(1e-5));
    for (std::size_t i = 0; i < 512; ++i)
      if (i != pos) CHECK(p.bins[i] < 1e-6);
  }
  const auto unshifted = power_spectrum(tone(5), FeatureConvention{SpectrumScale::linear, false});
  CHECK(unshifted.bins[5] == doctest::Approx(512.0).epsilon(1e-5));
}

TEST_CASE("Parseval identity") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = mix(modulate(ModulationKind::qam16, SynthesisConfig{}, seed), gen_pink_noise(512, 1.0, seed + 100),
                       static_cast<double>(seed) - 10.0);
    const auto p = power_spectrum(f);
    CHECK(sum(p.bins) == doctest::Approx(512.0 * f.measured_power()).epsilon(1e-6));
    for (float b : p.bins) CHECK(b >= 0.0F);
    CHECK(sum(featurize(f).bins) == doctest::Approx(512.0).epsilon(1e-6));
  }
}

TEST_CASE("power normalization") {
  const auto f = gen_white_noise(512, 3.0, 9);
  const auto g = normalize_power(f);
  CHECK(g.measured_power() == doctest::Approx(1.0).epsilon(1e-6));
  const auto h = normalize_power(g);
  for (std::size_t i = 0; i < 512; ++i) CHECK(std::abs(cdouble(h.samples[i]) - cdouble(g.samples[i])) < 1e-6);
  for (double c : {1e-3, 0.5, 10.0, 1e3}) {
    const auto gc = normalize_power(scaled(f, c));
    for (std::size_t i = 0; i < 512; ++i) CHECK(std::abs(cdouble(gc.samples[i]) - cdouble(g.samples[i])) < 1e-5);
  }
  ComplexFrame zero;
  zero.samples.assign(512, cfloat{});
  CHECK_THROWS_AS(normalize_power(zero), DegenerateInputError);
  CHECK_THROWS_AS(featurize(zero), DegenerateInputError);
}

TEST_CASE("featurize is invariant to scale and global phase") {
  const auto f = mix(modulate(ModulationKind::fsk4, SynthesisConfig{}, 4), gen_white_noise(512, 1.0, 5), 3.0);
  const auto base = featurize(f);
  for (cdouble c : {cdouble(10.0), cdouble(1e-3), cdouble(1e3), std::polar(1.0, 0.7), std::polar(25.0, -2.0)}) {
    const auto other = featurize(scaled(f, c));
    for (std::size_t i = 0; i < 512; ++i)
      CHECK(other.bins[i] == doctest::Approx(base.bins[i]).epsilon(1e-5).scale(1e-3));
  }
}

TEST_CASE("featurize equals normalize then power_spectrum") {
  const auto f = gen_pink_noise(512, 4.0, 2);
  const auto a = featurize(f);
  const auto b = power_spectrum(normalize_power(f));
  for (std::size_t i = 0; i < 512; ++i) CHECK(a.bins[i] == doctest::Approx(b.bins[i]).epsilon(1e-5).scale(1e-4));
  std::vector<float> raw(512);
  featurize_into(f, FeatureConvention{}, raw.data());
  CHECK(raw == a.bins);
}

TEST_CASE("averaged white periodogram is flat") {
  std::vector<double> avg(512, 0.0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto p = power_spectrum(gen_white_noise(512, 1.0, derive_seed(31, {static_cast<std::uint64_t>(i)})));
    for (std::size_t k = 0; k < 512; ++k) avg[k] += p.bins[k];
  }
  for (double v : avg) CHECK(std::abs(v / n - 1.0) < 0.05);
}

TEST_CASE("BPSK energy concentrates in band") {
  SynthesisConfig cfg;
  cfg.cfo_min = 0.0;
  cfg.cfo_max = 0.0;
  double in_band = 0.0, out_band = 0.0;
  int n_in = 0, n_out = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto r = mix(modulate(ModulationKind::bpsk, cfg, derive_seed(40, {i, 1})),
                       gen_white_noise(512, 1.0, derive_seed(40, {i, 2})), 0.0);
    const auto p = featurize(r);
    for (int k = 0; k < 512; ++k) {
      const double f = (k - 256) / 512.0;
      const double v = p.bins[static_cast<std::size_t>(k)];
      if (std::abs(f) < 0.06) {
        in_band += v;
        ++n_in;
      } else if (std::abs(f) > 0.15) {
        out_band += v;
        ++n_out;
      }
    }
  }
  CHECK(out_band / n_out < in_band / n_in);
}

TEST_CASE("dB scale and length errors") {
  const auto f = gen_white_noise(512, 1.0, 3);
  const auto lin = featurize(f);
  const auto db = featurize(f, FeatureConvention{SpectrumScale::db, true});
  CHECK(db.scale == SpectrumScale::db);
  for (std::size_t i = 0; i < 512; ++i)
    CHECK(db.bins[i] == doctest::Approx(10.0 * std::log10(std::max<double>(lin.bins[i], 1e-12))).epsilon(1e-4).scale(1.0));
  ComplexFrame short_frame = gen_white_noise(256, 1.0, 1);
  CHECK_THROWS_AS(power_spectrum(short_frame), DomainError);
  CHECK_THROWS_AS(featurize(short_frame), DomainError);
}
