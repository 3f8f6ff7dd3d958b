#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fedsim {

// Seed derivation: a single root seed fans out into independent per-purpose
// streams, keyed by a tag and/or an index. Same (root, tag, index) always
// yields the same stream.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t root, std::string_view tag) {
  uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return mix64(root ^ h);
}

inline uint64_t derive_seed(uint64_t root, uint64_t index) {
  return mix64(root ^ mix64(index + 1));
}

inline uint64_t derive_seed(uint64_t root, std::string_view tag, uint64_t index) {
  return derive_seed(derive_seed(root, tag), index);
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace fedsim
