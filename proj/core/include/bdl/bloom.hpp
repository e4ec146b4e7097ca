#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bdl/hash.hpp"
#include "bdl/parallel.hpp"

namespace bdl {

// Bloom filter keyed on canonical point coordinates, used to prefilter
// deletion batches per static tree. Probes use double hashing
// g_i(x) = h1(x) + i*h2(x) mod m. Construction may set bits from many
// threads concurrently (word-level atomic OR), so parallel and serial
// builds produce bitwise-identical filters. Never yields false negatives.
class BloomFilter {
 public:
  BloomFilter() = default;  // empty: rejects everything

  std::uint64_t bit_count() const { return mbits_; }
  int hash_count() const { return hashes_; }
  std::span<const std::uint64_t> words() const { return words_; }

  template <int D>
  static BloomFilter build(std::span<const Point<D>> points, int bits_per_key,
                           int h);

  template <int D>
  bool maybe_contains(const Point<D>& p) const {
    if (mbits_ == 0) return false;
    const auto probes = probe_pair(canonical_coords(p).data(), D);
    return test(probes.first, probes.second);
  }

 private:
  static std::pair<std::uint64_t, std::uint64_t> probe_pair(const double* key,
                                                            int d) {
    const std::size_t len = static_cast<std::size_t>(d) * sizeof(double);
    return {hash_bytes(key, len, kSeed1), hash_bytes(key, len, kSeed2)};
  }

  void set_atomic(std::uint64_t h1, std::uint64_t h2);
  bool test(std::uint64_t h1, std::uint64_t h2) const;

  static constexpr std::uint64_t kSeed1 = 0x8f3acb1d2f1e9a6dULL;
  static constexpr std::uint64_t kSeed2 = 0xd1b54a32d192ed03ULL;

  std::vector<std::uint64_t> words_;
  std::uint64_t mbits_ = 0;
  int hashes_ = 0;
};

template <int D>
BloomFilter BloomFilter::build(std::span<const Point<D>> points,
                               int bits_per_key, int h) {
  BloomFilter f;
  f.hashes_ = h;
  if (points.empty()) return f;
  const std::uint64_t raw = static_cast<std::uint64_t>(bits_per_key) *
                            static_cast<std::uint64_t>(points.size());
  f.mbits_ = (raw + 63) / 64 * 64;
  f.words_.assign(f.mbits_ / 64, 0);
  exec::parallel_for(0, points.size(), [&](std::size_t i) {
    const auto key = canonical_coords(points[i]);
    const auto probes = probe_pair(key.data(), D);
    f.set_atomic(probes.first, probes.second);
  });
  return f;
}

}  // namespace bdl
