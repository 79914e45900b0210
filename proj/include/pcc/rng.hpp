#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pcc {

using Rng = std::mt19937_64;

// Derives an independent seed for a named subsystem from a root seed.
// Stable across runs and platforms: FNV-1a over the label, mixed with splitmix64.
inline std::uint64_t fork_seed(std::uint64_t root, std::string_view label) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (h | 1ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace pcc
