#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "specsense/error.hpp"
#include "specsense/featurize.hpp"
#include "specsense/fft.hpp"
#include "specsense/rng.hpp"
#include "specsense/simd/gemm.hpp"
#include "specsense/simd/kernels.hpp"

using namespace specsense;
using namespace specsense::simd;

namespace {

std::vector<float> random_floats(std::size_t n, std::uint64_t seed, float lo = -1.0F, float hi = 1.0F) {
  CounterRng rng(seed);
  std::uniform_real_distribution<float> d(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<const KernelTable*> tables() {
  std::vector<const KernelTable*> t{&kernels_for(Isa::scalar)};
  if (isa_available(Isa::avx2)) t.push_back(&kernels_for(Isa::avx2));
  return t;
}

void check_close(const std::vector<float>& a, const std::vector<float>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(double(a[i]) - b[i]) <= tol * (1.0 + std::abs(double(b[i]))));
}

}  // namespace

TEST_CASE("isa names and dispatch") {
  CHECK(parse_isa("AVX2") == Isa::avx2);
  CHECK(parse_isa("scalar") == Isa::scalar);
  CHECK_FALSE(parse_isa("neon").has_value());
  CHECK(isa_available(Isa::scalar));
  CHECK(kernels_for(Isa::scalar).isa == Isa::scalar);
  const Isa before = active_isa();
  set_active_isa(Isa::scalar);
  CHECK(active_isa() == Isa::scalar);
  set_active_isa(before);
  CHECK(active_isa() == before);
  if (!isa_available(Isa::avx2)) CHECK_THROWS_AS(kernels_for(Isa::avx2), DomainError);
}

TEST_CASE("elementwise kernels agree across ISAs") {
  const auto& ref = kernels_for(Isa::scalar);
  for (const KernelTable* t : tables()) {
    CAPTURE(to_string(t->isa));
    for (std::size_t n : {0, 1, 3, 7, 8, 9, 15, 16, 17, 31, 64, 67, 1000}) {
      CAPTURE(n);
      const auto x = random_floats(n, 1 + n);
      const auto y = random_floats(n, 2 + n);

      double s0, q0, s1, q1;
      ref.sum_sumsq(x.data(), n, &s0, &q0);
      t->sum_sumsq(x.data(), n, &s1, &q1);
      CHECK(s1 == doctest::Approx(s0).epsilon(1e-12).scale(1.0));
      CHECK(q1 == doctest::Approx(q0).epsilon(1e-12).scale(1.0));
      ref.sum_dot(x.data(), y.data(), n, &s0, &q0);
      t->sum_dot(x.data(), y.data(), n, &s1, &q1);
      CHECK(s1 == doctest::Approx(s0).epsilon(1e-12).scale(1.0));
      CHECK(q1 == doctest::Approx(q0).epsilon(1e-12).scale(1.0));

      for (bool relu : {false, true}) {
        std::vector<float> a(n), b(n);
        ref.affine(x.data(), a.data(), n, 1.5F, -0.25F, relu);
        t->affine(x.data(), b.data(), n, 1.5F, -0.25F, relu);
        check_close(b, a, 1e-6);
        for (float v : b)
          if (relu) CHECK(v >= 0.0F);
      }

      std::vector<float> a(n), b(n);
      ref.lincomb(x.data(), y.data(), a.data(), n, 0.3F, -2.0F, 0.5F);
      t->lincomb(x.data(), y.data(), b.data(), n, 0.3F, -2.0F, 0.5F);
      check_close(b, a, 1e-6);

      a = y;
      b = y;
      ref.relu_backward(x.data(), a.data(), n);
      t->relu_backward(x.data(), b.data(), n);
      CHECK(a == b);

      a = y;
      b = y;
      ref.axpy(0.7F, x.data(), a.data(), n);
      t->axpy(0.7F, x.data(), b.data(), n);
      check_close(b, a, 1e-6);

      auto th0 = x, th1 = x;
      auto v0 = y, v1 = y;
      const auto g = random_floats(n, 3 + n);
      ref.sgd_momentum(th0.data(), v0.data(), g.data(), n, 0.01F, 0.9F);
      t->sgd_momentum(th1.data(), v1.data(), g.data(), n, 0.01F, 0.9F);
      check_close(th1, th0, 1e-6);
      check_close(v1, v0, 1e-6);

      std::vector<double> inter(2 * n), o0(n), o1(n);
      for (std::size_t i = 0; i < 2 * n; ++i) inter[i] = (i % 3) - 1.3 * double(i % 5);
      ref.norm2_f64(inter.data(), o0.data(), n);
      t->norm2_f64(inter.data(), o1.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(o1[i] == doctest::Approx(o0[i]).epsilon(1e-14));
        CHECK(o0[i] == doctest::Approx(inter[2 * i] * inter[2 * i] + inter[2 * i + 1] * inter[2 * i + 1]));
      }
    }
  }
}

TEST_CASE("sgd_momentum follows the update rule") {
  for (const KernelTable* t : tables()) {
    float theta = 0.0F, v = 0.0F;
    const float g = 1.0F;
    t->sgd_momentum(&theta, &v, &g, 1, 0.1F, 0.9F);
    CHECK(v == doctest::Approx(-0.1));
    t->sgd_momentum(&theta, &v, &g, 1, 0.1F, 0.9F);
    CHECK(v == doctest::Approx(-0.19));
    CHECK(theta == doctest::Approx(-0.29));
  }
}

TEST_CASE("gemm matches a naive double oracle") {
  struct Case {
    std::size_t m, n, k;
    bool ta, tb, acc;
  };
  const Case cases[] = {{1, 1, 1, false, false, false},   {6, 16, 5, false, false, false},
                        {7, 17, 9, true, false, true},    {13, 40, 33, false, true, false},
                        {64, 129, 192, true, true, true}, {48, 512, 15, false, false, true},
                        {2, 3, 300, false, true, false}};
  for (const KernelTable* t : tables()) {
    for (const auto& cs : cases) {
      CAPTURE(to_string(t->isa));
      CAPTURE(cs.m);
      CAPTURE(cs.n);
      CAPTURE(cs.k);
      const auto a = random_floats(cs.m * cs.k, 10);
      const auto b = random_floats(cs.k * cs.n, 11);
      const auto c0 = random_floats(cs.m * cs.n, 12);
      MatrixView<float> av = cs.ta ? row_major(a.data(), cs.m).transposed() : row_major(a.data(), cs.k);
      MatrixView<float> bv = cs.tb ? row_major(b.data(), cs.k).transposed() : row_major(b.data(), cs.n);
      auto c = c0;
      gemm(cs.m, cs.n, cs.k, av, bv, c.data(), cs.n, cs.acc, *t);
      for (std::size_t i = 0; i < cs.m; ++i)
        for (std::size_t j = 0; j < cs.n; ++j) {
          double want = cs.acc ? c0[i * cs.n + j] : 0.0;
          double mag = std::abs(want);
          for (std::size_t p = 0; p < cs.k; ++p) {
            want += double(av(i, p)) * double(bv(p, j));
            mag += std::abs(double(av(i, p)) * double(bv(p, j)));
          }
          CHECK(std::abs(c[i * cs.n + j] - want) <= 1e-6 * (1.0 + mag));
        }
    }
  }
}

TEST_CASE("double gemm is exact to rounding") {
  const std::size_t m = 9, n = 21, k = 14;
  std::vector<double> a(m * k), b(k * n), c(m * n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::sin(double(i));
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::cos(double(i) * 0.3);
  gemm(m, n, k, row_major(a.data(), k), row_major(b.data(), n), c.data(), n, false);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double want = 0.0;
      for (std::size_t p = 0; p < k; ++p) want += a[i * k + p] * b[p * n + j];
      CHECK(c[i * n + j] == doctest::Approx(want).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("fft matches a naive DFT") {
  for (std::size_t n : {1, 2, 8, 64, 512}) {
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = {std::sin(0.3 * double(i) + 1.0), std::cos(1.7 * double(i))};
    auto y = x;
    fft::transform(y, false);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> want{};
      for (std::size_t t = 0; t < n; ++t)
        want += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * t % n) / double(n));
      CHECK(std::abs(y[k] - want) < 1e-9 * double(n));
    }
    fft::transform(y, true);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y[i] / double(n) - x[i]) < 1e-12);
  }
  std::vector<std::complex<double>> bad(6);
  CHECK_THROWS_AS(fft::transform(bad), DomainError);
}

TEST_CASE("featurize agrees across ISAs") {
  if (!isa_available(Isa::avx2)) return;
  const Isa before = active_isa();
  const auto f = gen_white_noise(512, 2.0, 77);
  set_active_isa(Isa::scalar);
  const auto a = featurize(f);
  set_active_isa(Isa::avx2);
  const auto b = featurize(f);
  set_active_isa(before);
  for (std::size_t i = 0; i < 512; ++i) CHECK(b.bins[i] == doctest::Approx(a.bins[i]).epsilon(1e-6));
}
