#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace geezmt {

// std::mt19937_64's output sequence is fixed by the standard, but the
// library distributions are not. Bounded draws and shuffles go through
// these helpers so a seed means the same permutation everywhere.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = gen();
  while (x >= limit) x = gen();
  return x % bound;
}

template <typename T>
void deterministic_shuffle(std::span<T> items, std::mt19937_64& gen) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(gen, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace geezmt
