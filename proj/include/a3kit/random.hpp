#pragma once

// Seeded sampling helpers with results that are identical on every
// platform. std::uniform_int_distribution and std::shuffle are
// implementation-defined, so they are not used for anything persisted.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace a3kit {

using Rng = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection sampling; bound must be > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound);
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

/// Fisher-Yates shuffle.
template <typename T>
void seeded_shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

/// `count` distinct values from [0, n), sampled without replacement and
/// returned in ascending order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count && i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(std::min(count, n));
  std::sort(pool.begin(), pool.end());
  return pool;
}

} // namespace a3kit
