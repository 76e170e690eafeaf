#include "specsense/stats.hpp"

#include <algorithm>
#include <cmath>

#include "specsense/error.hpp"

namespace specsense::stats {
namespace {

double log_choose(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

CountInterval equal_tails(const std::vector<double>& pmf, double level) {
  const double tail = (1.0 - level) / 2.0;
  CountInterval out{0, pmf.empty() ? 0 : pmf.size() - 1};
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    if (acc + pmf[k] > tail) {
      out.low = k;
      break;
    }
    acc += pmf[k];
  }
  acc = 0.0;
  for (std::size_t k = pmf.size(); k-- > 0;) {
    if (acc + pmf[k] > tail) {
      out.high = k;
      break;
    }
    acc += pmf[k];
  }
  return out;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
}

}  // namespace

Interval wilson(std::size_t k, std::size_t n, double z) {
  if (k > n) throw DomainError("more successes than trials");
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // the bounds at k = 0 and k = n are exactly 0 and 1; rounding would leave a residue
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

CountInterval binomial_interval(std::size_t n, double p, double level) {
  check_level(level);
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0, 1]");
  std::vector<double> pmf(n + 1, 0.0);
  if (p == 0.0 || p == 1.0) {
    pmf[p == 0.0 ? 0 : n] = 1.0;
  } else {
    for (std::size_t k = 0; k <= n; ++k)
      pmf[k] = std::exp(log_choose(static_cast<double>(n), static_cast<double>(k)) + static_cast<double>(k) * std::log(p) +
                        static_cast<double>(n - k) * std::log1p(-p));
  }
  return equal_tails(pmf, level);
}

CountInterval beta_binomial_interval(std::size_t m, double a, double b, double level) {
  check_level(level);
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta-binomial shape parameters must be positive");
  std::vector<double> pmf(m + 1);
  const double md = static_cast<double>(m);
  for (std::size_t x = 0; x <= m; ++x) {
    const double xd = static_cast<double>(x);
    pmf[x] = std::exp(log_choose(md, xd) + log_beta(xd + a, md - xd + b) - log_beta(a, b));
  }
  return equal_tails(pmf, level);
}

std::size_t quantile_rank(std::size_t n, double pf) {
  if (n == 0) throw DomainError("quantile of an empty sample");
  if (!(pf > 0.0 && pf < 1.0)) throw DomainError("false-alarm target must lie in (0, 1)");
  // the small slack keeps exact products like 0.9 * 10000 from rounding up a rank
  const double r = std::ceil((1.0 - pf) * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(r), 1, n);
}

CountInterval calibrated_exceedance_interval(std::size_t n_calibration, double pf, std::size_t m, double level) {
  const std::size_t k = quantile_rank(n_calibration, pf);
  return beta_binomial_interval(m, static_cast<double>(n_calibration - k + 1), static_cast<double>(k), level);
}

std::vector<double> isotonic_nondecreasing(std::span<const double> y, std::span<const double> w) {
  if (!w.empty() && w.size() != y.size()) throw DomainError("weight count does not match values");
  struct Block {
    double mean, weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w.empty() ? 1.0 : w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const double wt = a.weight + b.weight;
      a.mean = (a.mean * a.weight + b.mean * b.weight) / wt;
      a.weight = wt;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

}  // namespace specsense::stats
