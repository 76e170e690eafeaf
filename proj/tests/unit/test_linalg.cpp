#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "specsense/error.hpp"
#include "specsense/hermitian_eig.hpp"
#include "specsense/parallel.hpp"
#include "specsense/rng.hpp"
#include "specsense/stats.hpp"

using namespace specsense;
using cd = std::complex<double>;

namespace {

// Roots of the characteristic polynomial of a 3x3 Hermitian matrix by the trigonometric cubic formula.
std::vector<double> char_poly_roots(const std::vector<cd>& a) {
  auto at = [&](int i, int j) { return a[static_cast<std::size_t>(3 * i + j)]; };
  const double tr = (at(0, 0) + at(1, 1) + at(2, 2)).real();
  const double c1 = (at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0) + at(0, 0) * at(2, 2) - at(0, 2) * at(2, 0) +
                     at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1))
                        .real();
  const double det = (at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
                      at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
                      at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0)))
                         .real();
  // lambda^3 - tr lambda^2 + c1 lambda - det = 0, shifted by tr/3 to t^3 + p t + q = 0
  const double p = c1 - tr * tr / 3.0;
  const double q = -2.0 * tr * tr * tr / 27.0 + tr * c1 / 3.0 - det;
  std::vector<double> roots;
  const double r = std::sqrt(-p / 3.0);
  const double arg = std::clamp(3.0 * q / (2.0 * p * r), -1.0, 1.0);
  const double phi = std::acos(arg) / 3.0;
  for (int k = 0; k < 3; ++k) roots.push_back(2.0 * r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + tr / 3.0);
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<cd> random_hermitian(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cd> a(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i * n + i] = g(rng);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[i * n + j] = {g(rng), g(rng)};
      a[j * n + i] = std::conj(a[i * n + j]);
    }
  }
  return a;
}

}  // namespace

TEST_CASE("hermitian eigenvalues match the characteristic polynomial at L = 3") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = random_hermitian(3, seed);
    const auto want = char_poly_roots(a);
    const auto got = linalg::hermitian_eigenvalues(a, 3);
    REQUIRE(got.size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(got[static_cast<std::size_t>(k)] - want[static_cast<std::size_t>(k)]) < 1e-8);
  }
}

TEST_CASE("eigenvalue identities") {
  std::vector<cd> eye(100, 0.0);
  for (int i = 0; i < 10; ++i) eye[static_cast<std::size_t>(11 * i)] = 1.0;
  const auto ev = linalg::hermitian_eigenvalues(eye, 10);
  for (double v : ev) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ev.back() / ev.front() == doctest::Approx(1.0).epsilon(1e-14));

  for (std::size_t n : {1, 2, 5, 10, 32}) {
    const auto a = random_hermitian(n, 7 + n);
    const auto e = linalg::hermitian_eigenvalues(a, n);
    double trace = 0.0, frob = 0.0, sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += a[i * n + i].real();
    for (const auto& x : a) frob += std::norm(x);
    for (double v : e) {
      sum += v;
      sumsq += v * v;
    }
    CHECK(std::is_sorted(e.begin(), e.end()));
    CHECK(sum == doctest::Approx(trace).epsilon(1e-9).scale(1.0));
    CHECK(sumsq == doctest::Approx(frob).epsilon(1e-9));
  }

  const std::vector<double> sym = {2, 1, 0, 1, 2, 0, 0, 0, 5};
  const auto s = linalg::symmetric_eigenvalues(sym, 3);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(3.0));
  CHECK(s[2] == doctest::Approx(5.0));
}

TEST_CASE("wilson intervals") {
  const auto w = stats::wilson(5, 10);
  CHECK(w.low == doctest::Approx(0.23659309051256394).epsilon(1e-12));
  CHECK(w.high == doctest::Approx(0.7634069094874361).epsilon(1e-12));
  const auto z = stats::wilson(0, 50);
  CHECK(z.low == 0.0);
  CHECK(z.high == doctest::Approx(0.07134759913335874).epsilon(1e-12));
  const auto h = stats::wilson(990, 1000);
  CHECK(h.low == doctest::Approx(0.9816905311296853).epsilon(1e-12));
  CHECK(h.high == doctest::Approx(0.9945592455544707).epsilon(1e-12));
  const auto e = stats::wilson(0, 0);
  CHECK(e.low == 0.0);
  CHECK(e.high == 1.0);
  for (std::size_t k = 0; k <= 40; ++k) CHECK(stats::wilson(k, 40).contains(double(k) / 40.0));
}

TEST_CASE("binomial acceptance regions") {
  const auto a = stats::binomial_interval(10000, 0.01);
  CHECK(a.low == 81);
  CHECK(a.high == 120);
  const auto b = stats::binomial_interval(10000, 0.1);
  CHECK(b.low == 942);
  CHECK(b.high == 1059);
  const auto c = stats::calibrated_exceedance_interval(10000, 0.01, 10000, 0.95);
  CHECK(c.low == 75);
  CHECK(c.high == 130);
  CHECK(c.low < a.low);
  CHECK(c.high > a.high);
  CHECK_THROWS_AS(stats::binomial_interval(10, 1.5), DomainError);
}

TEST_CASE("quantile rank") {
  CHECK(stats::quantile_rank(10000, 0.01) == 9900);
  CHECK(stats::quantile_rank(10000, 0.1) == 9000);
  CHECK(stats::quantile_rank(101, 0.5) == 51);
  CHECK(stats::quantile_rank(100, 0.5) == 50);
  CHECK(stats::quantile_rank(3, 0.999) == 1);
  CHECK_THROWS_AS(stats::quantile_rank(0, 0.1), DomainError);
  CHECK_THROWS_AS(stats::quantile_rank(10, 0.0), DomainError);
}

TEST_CASE("isotonic regression") {
  const std::vector<double> y = {1, 3, 2, 4, 0};
  const auto f = stats::isotonic_nondecreasing(y);
  CHECK(f == std::vector<double>{1, 2.25, 2.25, 2.25, 2.25});
  const std::vector<double> inc = {0.1, 0.2, 0.9};
  CHECK(stats::isotonic_nondecreasing(inc) == inc);
  const std::vector<double> w = {3, 1};
  const std::vector<double> y2 = {2, 0};
  const auto g = stats::isotonic_nondecreasing(y2, w);
  CHECK(g[0] == doctest::Approx(1.5));
  CHECK(g[1] == doctest::Approx(1.5));
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  for (unsigned threads : {1U, 3U, 8U}) {
    set_thread_limit(threads);
    std::vector<int> hits(1001, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK_THROWS_AS(parallel_for(100, [](std::size_t i) { if (i == 57) throw DomainError("x"); }), DomainError);
  }
  set_thread_limit(0);
  CHECK(thread_limit() >= 1);
}
