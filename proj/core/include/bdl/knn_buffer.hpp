#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bdl {

struct Neighbor {
  std::uint32_t id = 0;
  double dist2 = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
  return a.id < b.id;
}

// Bounded accumulator of the k nearest candidates seen so far. Physically
// holds up to 2k entries; when full, a serial selection keeps the k nearest
// (ties by smaller id) and tightens the rejection bound, so insertion is
// amortized O(1). Not thread-safe: each query point owns one buffer.
class KnnBuffer {
 public:
  explicit KnnBuffer(int k) : k_(k) {
    if (k < 1) throw std::invalid_argument("KnnBuffer: k must be >= 1");
    entries_.reserve(2 * static_cast<std::size_t>(k));
  }

  void insert(std::uint32_t id, double dist2) {
    if (dist2 > bound_) return;  // strictly worse than the current k-th
    entries_.push_back({id, dist2});
    if (entries_.size() == 2 * static_cast<std::size_t>(k_)) {
      compact();
    } else if (entries_.size() == static_cast<std::size_t>(k_) &&
               bound_ == std::numeric_limits<double>::infinity()) {
      double worst = 0;
      for (const Neighbor& e : entries_) worst = std::max(worst, e.dist2);
      bound_ = worst;
    }
  }

  // True once k candidates have been retained; the bound is finite from then on.
  bool full() const { return entries_.size() >= static_cast<std::size_t>(k_); }

  double bound() const { return bound_; }
  int k() const { return k_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t compaction_count() const { return compactions_; }

  // The true k smallest of everything inserted, ascending by (dist2, id).
  std::vector<Neighbor> finalize() const {
    std::vector<Neighbor> out(entries_);
    std::sort(out.begin(), out.end(), neighbor_less);
    if (out.size() > static_cast<std::size_t>(k_)) out.resize(k_);
    return out;
  }

 private:
  void compact() {
    auto nth = entries_.begin() + (k_ - 1);
    std::nth_element(entries_.begin(), nth, entries_.end(), neighbor_less);
    bound_ = nth->dist2;
    entries_.resize(k_);
    ++compactions_;
  }

  int k_;
  double bound_ = std::numeric_limits<double>::infinity();
  std::vector<Neighbor> entries_;
  std::size_t compactions_ = 0;
};

}  // namespace bdl
