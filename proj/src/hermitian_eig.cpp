#include "specsense/hermitian_eig.hpp"

#include <algorithm>
#include <cmath>

#include "specsense/error.hpp"

namespace specsense::linalg {

std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n, double tol) {
  if (a.size() != n * n) throw DomainError("matrix storage does not match its order");
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  double total = 0.0;
  for (double v : a) total += v * v;
  const double stop = tol * tol * total;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * at(i, j) * at(i, j);
    if (off <= stop) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

std::vector<double> hermitian_eigenvalues(const std::vector<std::complex<double>>& a, std::size_t n, double tol) {
  if (a.size() != n * n) throw DomainError("matrix storage does not match its order");
  const std::size_t m = 2 * n;
  std::vector<double> e(m * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::complex<double> v = a[i * n + j];
      e[i * m + j] = v.real();
      e[i * m + j + n] = -v.imag();
      e[(i + n) * m + j] = v.imag();
      e[(i + n) * m + j + n] = v.real();
    }
  }
  const auto doubled = symmetric_eigenvalues(std::move(e), m, tol);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
  return out;
}

}  // namespace specsense::linalg
