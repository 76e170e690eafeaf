#include "specsense/rng.hpp"

namespace specsense {

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = CounterRng::mix(master ^ 0x5851f42d4c957f2dULL);
  for (std::uint64_t v : path) {
    h = CounterRng::mix(h + 0x9e3779b97f4a7c15ULL + CounterRng::mix(v + 0x632be59bd9b4e019ULL));
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, SeedDomain domain,
                          std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = derive_seed(master, {static_cast<std::uint64_t>(domain)});
  return derive_seed(h, path);
}

}  // namespace specsense
