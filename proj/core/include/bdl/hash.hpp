#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>

#include "bdl/geometry.hpp"

namespace bdl {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// MurmurHash64A (Appleby), seedable.
inline std::uint64_t hash_bytes(const void* data, std::size_t len,
                                std::uint64_t seed) {
  const std::uint64_t m = 0xc6a4a7935bd1e995ULL;
  const int r = 47;
  std::uint64_t h = seed ^ (len * m);
  const auto* p = static_cast<const unsigned char*>(data);
  const auto* end = p + (len / 8) * 8;
  while (p != end) {
    std::uint64_t k;
    std::memcpy(&k, p, 8);
    p += 8;
    k *= m;
    k ^= k >> r;
    k *= m;
    h ^= k;
    h *= m;
  }
  switch (len & 7) {
    case 7: h ^= std::uint64_t(p[6]) << 48; [[fallthrough]];
    case 6: h ^= std::uint64_t(p[5]) << 40; [[fallthrough]];
    case 5: h ^= std::uint64_t(p[4]) << 32; [[fallthrough]];
    case 4: h ^= std::uint64_t(p[3]) << 24; [[fallthrough]];
    case 3: h ^= std::uint64_t(p[2]) << 16; [[fallthrough]];
    case 2: h ^= std::uint64_t(p[1]) << 8; [[fallthrough]];
    case 1: h ^= std::uint64_t(p[0]); h *= m;
  }
  h ^= h >> r;
  h *= m;
  h ^= h >> r;
  return h;
}

// Canonical coordinate key: the little-endian byte concatenation of the d
// coordinates, ids excluded, with -0.0 normalized to +0.0 so that
// numerically equal coordinates always hash identically.
template <int D>
inline std::array<double, D> canonical_coords(const Point<D>& p) {
  std::array<double, D> k;
  for (int c = 0; c < D; ++c) k[c] = p.x[c] == 0.0 ? 0.0 : p.x[c];
  return k;
}

template <int D>
inline std::uint64_t hash_coords(const Point<D>& p, std::uint64_t seed) {
  const auto key = canonical_coords(p);
  return hash_bytes(key.data(), sizeof(key), seed);
}

}  // namespace bdl
