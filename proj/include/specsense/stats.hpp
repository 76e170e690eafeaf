#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace specsense::stats {

constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0.0;
  double high = 1.0;
  bool contains(double x) const noexcept { return x >= low && x <= high; }
  double width() const noexcept { return high - low; }
};

/// Wilson score interval for k successes in n trials; [0, 1] when n == 0.
Interval wilson(std::size_t k, std::size_t n, double z = kZ95);

/// Inclusive count range [low, high] with each tail holding at most (1 - level)/2.
struct CountInterval {
  std::size_t low = 0;
  std::size_t high = 0;
  bool contains(std::size_t k) const noexcept { return k >= low && k <= high; }
};

/// Equal-tailed acceptance region of Binomial(n, p).
CountInterval binomial_interval(std::size_t n, double p, double level = 0.95);

/// Equal-tailed acceptance region of the beta-binomial(m, a, b) count.
CountInterval beta_binomial_interval(std::size_t m, double a, double b, double level = 0.95);

/// Predictive region for the number of fresh noise frames (out of m) that exceed a threshold set at
/// the order statistic of rank ceil((1 - pf) n) among n calibration frames. Exceedance probability of
/// that threshold is Beta(n - k + 1, k) distributed for a continuous statistic.
CountInterval calibrated_exceedance_interval(std::size_t n_calibration, double pf, std::size_t m, double level);

/// Rank (1-based) of the order statistic used as the (1 - pf) quantile of n samples.
std::size_t quantile_rank(std::size_t n, double pf);

/// Least-squares nondecreasing fit (pool adjacent violators). Weights default to 1.
std::vector<double> isotonic_nondecreasing(std::span<const double> y, std::span<const double> w = {});

}  // namespace specsense::stats
