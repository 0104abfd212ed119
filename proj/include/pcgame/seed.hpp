#pragma once

#include <cstdint>

namespace pcgame {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of stream `index` under `base`. Distinct (base, index) pairs give
// unrelated seeds, so streams can be drawn in any order.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix64(mix64(base) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace pcgame
