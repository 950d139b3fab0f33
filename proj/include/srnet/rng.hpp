#pragma once

#include <cstdint>

namespace srnet {

/// splitmix64 finaliser.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-item seed so parallel workers produce schedule-independent output.
constexpr uint64_t derive_seed(uint64_t global_seed, uint64_t index) {
  return mix64(mix64(global_seed) ^ (index * 0xd1b54a32d192ed03ULL));
}

}  // namespace srnet
