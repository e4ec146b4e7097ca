#pragma once

#include <cassert>
#include <cstdint>
#include <span>
#include <vector>

#include "bdl/knn_buffer.hpp"
#include "bdl/static_tree.hpp"

namespace bdl {

// Per query point: the k nearest neighbors, ascending by (dist2, id).
using KnnResult = std::vector<std::vector<Neighbor>>;

// Log-structured batch-dynamic k-d tree: a buffer tree of capacity X plus
// static trees where slot i holds up to 2^i * X points. Batch insertion is
// binary-counter addition over the occupancy bitmask (rebuild exactly the
// slots whose bits turn on); batch deletion erases from every tree and
// reinserts the contents of any slot that falls strictly below half of its
// nominal capacity.
template <int D>
class BdlTree {
 public:
  struct Config {
    std::size_t buffer_cap = 1024;  // X
    int initial_slots = 0;          // N_s; grows on demand
    Heuristic heuristic = Heuristic::ObjectMedian;
    int leaf_cap = kDefaultLeafCap;
    bool use_bloom = true;
    int bloom_bits_per_key = 10;
    int bloom_hashes = 7;
  };

  struct Stats {
    std::size_t total_live = 0;
    std::uint64_t mask = 0;
    std::vector<std::size_t> slot_live;
    std::size_t buffer_live = 0;
  };

  BdlTree() : BdlTree(Config{}) {}
  explicit BdlTree(Config cfg) : cfg_(cfg) {
    if (cfg_.buffer_cap < 1) throw std::invalid_argument("buffer_cap >= 1");
    slots_.resize(cfg_.initial_slots);
    rebuilds_.resize(cfg_.initial_slots, 0);
  }

  const Config& config() const { return cfg_; }
  std::uint64_t mask() const { return mask_; }
  std::size_t buffer_live() const { return buffer_.live(); }
  std::size_t slot_count() const { return slots_.size(); }
  std::size_t slot_nominal(std::size_t i) const {
    return (std::size_t{1} << i) * cfg_.buffer_cap;
  }
  const StaticTree<D>& slot(std::size_t i) const { return slots_[i]; }
  const StaticTree<D>& buffer_tree() const { return buffer_; }
  std::span<const std::size_t> rebuild_counts() const { return rebuilds_; }

  std::size_t total_live() const {
    std::size_t t = buffer_.live();
    for (const auto& s : slots_) t += s.live();
    return t;
  }

  Stats stats() const {
    Stats st;
    st.mask = mask_;
    st.buffer_live = buffer_.live();
    st.slot_live.reserve(slots_.size());
    for (const auto& s : slots_) st.slot_live.push_back(s.live());
    st.total_live = total_live();
    return st;
  }

  void insert(std::span<const Point<D>> batch);
  std::size_t erase(std::span<const Point<D>> batch);
  KnnResult knn(std::span<const Point<D>> queries, int k) const;

  std::vector<Point<D>> collect_live() const {
    std::vector<Point<D>> out = buffer_.collect_live();
    for (const auto& s : slots_) {
      auto v = s.collect_live();
      out.insert(out.end(), v.begin(), v.end());
    }
    return out;
  }

 private:
  void rebuild_buffer(std::vector<Point<D>> pts) {
    buffer_ = StaticTree<D>::build_heap(std::move(pts), cfg_.heuristic,
                                        cfg_.leaf_cap);
  }

  void grow_slots(std::uint64_t mask_new) {
    while ((std::uint64_t{1} << slots_.size()) <= mask_new) {
      slots_.emplace_back();
      rebuilds_.push_back(0);
    }
  }

  // Installs `pool` into the slots set in `build_bits`, smallest slot first.
  // Every slot but the largest receives exactly its nominal capacity; the
  // largest takes the remainder (it may come up short when deconstructed
  // slots were under-full, in which case the half-capacity rule fires below).
  void build_new_slots(std::uint64_t build_bits, std::vector<Point<D>> pool);

  // Clears every occupied slot strictly below half capacity and reinserts
  // the gathered points. Shared by erase and the post-merge closure.
  void enforce_half_capacity();

  Config cfg_;
  StaticTree<D> buffer_;
  std::vector<StaticTree<D>> slots_;
  std::vector<std::size_t> rebuilds_;
  std::uint64_t mask_ = 0;
};

template <int D>
void BdlTree<D>::insert(std::span<const Point<D>> batch) {
  if (batch.empty()) return;
  const std::size_t X = cfg_.buffer_cap;
  const std::size_t m = batch.size() % X;
  const std::size_t b = buffer_.live();

  std::vector<Point<D>> rest;
  if (b + m < X) {
    if (m > 0) {
      auto keep = buffer_.collect_live();
      keep.insert(keep.end(), batch.begin(), batch.begin() + m);
      rebuild_buffer(std::move(keep));
    }
    rest.assign(batch.begin() + m, batch.end());
  } else {
    // The remainder would overflow the buffer: borrow X - m buffer points
    // into the batch so it becomes a whole number of slot units.
    auto held = buffer_.collect_live();
    const std::size_t take = X - m;
    rest.assign(batch.begin(), batch.end());
    rest.insert(rest.end(), held.begin(), held.begin() + take);
    rebuild_buffer(std::vector<Point<D>>(held.begin() + take, held.end()));
  }
  assert(rest.size() % X == 0);
  const std::uint64_t units = rest.size() / X;
  if (units == 0) return;

  const std::uint64_t mask_new = mask_ + units;
  grow_slots(mask_new);
  const std::uint64_t deconstruct = mask_ & ~mask_new;
  const std::uint64_t construct = mask_new & ~mask_;

  // gather points of deconstructed slots, then the fresh batch points
  std::vector<Point<D>> pool;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if ((deconstruct >> i) & 1) {
      auto pts = slots_[i].collect_live();
      pool.insert(pool.end(), pts.begin(), pts.end());
      slots_[i] = StaticTree<D>();
    }
  }
  pool.insert(pool.end(), rest.begin(), rest.end());

  mask_ = mask_new;
  build_new_slots(construct, std::move(pool));
  enforce_half_capacity();
}

template <int D>
void BdlTree<D>::build_new_slots(std::uint64_t build_bits,
                                 std::vector<Point<D>> pool) {
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if ((build_bits >> i) & 1) targets.push_back(i);
  }
  if (targets.empty()) {
    assert(pool.empty());
    return;
  }
  // chunk boundaries: nominal capacity per slot, remainder to the largest
  std::vector<std::pair<std::size_t, std::size_t>> ranges(targets.size());
  std::size_t off = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const bool last = t + 1 == targets.size();
    const std::size_t want = slot_nominal(targets[t]);
    const std::size_t take =
        last ? pool.size() - off : std::min(want, pool.size() - off);
    ranges[t] = {off, off + take};
    off += take;
  }
  assert(off == pool.size());
  exec::parallel_for(
      0, targets.size(),
      [&](std::size_t t) {
        std::vector<Point<D>> chunk(pool.begin() + ranges[t].first,
                                    pool.begin() + ranges[t].second);
        slots_[targets[t]] = StaticTree<D>::build_veb(
            std::move(chunk), cfg_.heuristic, cfg_.leaf_cap);
        ++rebuilds_[targets[t]];
      },
      /*grain=*/1);
}

template <int D>
void BdlTree<D>::enforce_half_capacity() {
  for (int guard = 0; guard < 64; ++guard) {
    std::vector<Point<D>> gathered;
    std::uint64_t cleared = 0;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (((mask_ >> i) & 1) == 0) continue;
      const std::size_t half = (slot_nominal(i) + 1) / 2;
      if (slots_[i].live() >= half) continue;
      auto pts = slots_[i].collect_live();
      gathered.insert(gathered.end(), pts.begin(), pts.end());
      slots_[i] = StaticTree<D>();
      cleared |= std::uint64_t{1} << i;
    }
    if (cleared == 0) return;
    mask_ &= ~cleared;
    if (gathered.empty()) continue;
    insert(gathered);
    return;  // the recursive insert ran its own closure
  }
  assert(false && "half-capacity closure did not converge");
}

template <int D>
std::size_t BdlTree<D>::erase(std::span<const Point<D>> batch) {
  if (batch.empty()) return 0;

  std::vector<std::size_t> occupied;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if ((mask_ >> i) & 1) occupied.push_back(i);
  }

  // one task per tree (buffer last); each prefilters through its bloom
  // filter and erases, both internally parallel
  std::vector<std::size_t> removed_per(occupied.size() + 1, 0);
  exec::parallel_for(
      0, occupied.size() + 1,
      [&](std::size_t t) {
        if (t == occupied.size()) {
          removed_per[t] = buffer_.erase_batch(batch);
          return;
        }
        StaticTree<D>& tree = slots_[occupied[t]];
        if (cfg_.use_bloom) {
          tree.ensure_bloom(cfg_.bloom_bits_per_key, cfg_.bloom_hashes);
          std::vector<Point<D>> filtered;
          for (const Point<D>& p : batch) {
            if (tree.bloom()->maybe_contains(p)) filtered.push_back(p);
          }
          removed_per[t] = tree.erase_batch(filtered);
        } else {
          removed_per[t] = tree.erase_batch(batch);
        }
      },
      /*grain=*/1);

  std::size_t removed = 0;
  for (std::size_t r : removed_per) removed += r;
  if (removed_per.back() > 0) rebuild_buffer(buffer_.collect_live());

  enforce_half_capacity();
  return removed;
}

template <int D>
KnnResult BdlTree<D>::knn(std::span<const Point<D>> queries, int k) const {
  std::vector<KnnBuffer> buffers(queries.size(), KnnBuffer(k));
  // trees processed one at a time, largest to smallest, buffer last;
  // parallelism is across the query points within each tree
  for (std::size_t i = slots_.size(); i-- > 0;) {
    if (((mask_ >> i) & 1) == 0) continue;
    const StaticTree<D>& tree = slots_[i];
    exec::parallel_for(0, queries.size(), [&](std::size_t qi) {
      tree.knn_single(queries[qi], buffers[qi]);
    });
  }
  if (!buffer_.empty()) {
    exec::parallel_for(0, queries.size(), [&](std::size_t qi) {
      buffer_.knn_single(queries[qi], buffers[qi]);
    });
  }
  KnnResult out(queries.size());
  exec::parallel_for(0, queries.size(),
                     [&](std::size_t qi) { out[qi] = buffers[qi].finalize(); });
  return out;
}

}  // namespace bdl
