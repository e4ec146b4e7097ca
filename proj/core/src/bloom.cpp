#include "bdl/bloom.hpp"

#include <atomic>

namespace bdl {

void BloomFilter::set_atomic(std::uint64_t h1, std::uint64_t h2) {
  for (int i = 0; i < hashes_; ++i) {
    const std::uint64_t bit = (h1 + static_cast<std::uint64_t>(i) * h2) % mbits_;
    std::atomic_ref<std::uint64_t> word(words_[bit / 64]);
    word.fetch_or(1ULL << (bit % 64), std::memory_order_relaxed);
  }
}

bool BloomFilter::test(std::uint64_t h1, std::uint64_t h2) const {
  for (int i = 0; i < hashes_; ++i) {
    const std::uint64_t bit = (h1 + static_cast<std::uint64_t>(i) * h2) % mbits_;
    if ((words_[bit / 64] & (1ULL << (bit % 64))) == 0) return false;
  }
  return true;
}

}  // namespace bdl
