#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace permcast::rng {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t fnv1a(std::string_view text) noexcept;

/// Seed of substream `index` under (master, key). Streams are independent of
/// evaluation order, so trials can run on any thread in any order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t key, std::uint64_t index) noexcept;

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return derive_seed(master, 0, index);
}

inline Engine make_engine(std::uint64_t seed) { return Engine{splitmix64(seed)}; }

}  // namespace permcast::rng
