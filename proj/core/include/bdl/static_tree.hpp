#pragma once

#include <atomic>
#include <bit>
#include <cassert>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bdl/bloom.hpp"
#include "bdl/geometry.hpp"
#include "bdl/knn_buffer.hpp"
#include "bdl/parallel.hpp"
#include "bdl/parprim.hpp"

namespace bdl {

enum class Heuristic { ObjectMedian, SpatialMedian };
enum class TreeLayout { Veb, LevelOrder };
enum class NodeKind : std::uint8_t { Vacant, Internal, Leaf };

inline constexpr int kDefaultLeafCap = 16;

// Smallest power of two >= n.
inline std::uint64_t hyperceiling(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("hyperceiling: n must be positive");
  return std::bit_ceil(n);
}

// A static k-d tree over a point set, stored as a contiguous node array.
// Object-median trees use the van Emde Boas recursive layout built fully in
// parallel; spatial-median trees and buffer ("heap") trees use a level-order
// placement, since skewed value splits make complete-tree address arithmetic
// unusable. Supports parallel batch deletion with tombstones and node
// contraction, and single-point exact k-NN.
template <int D>
class StaticTree {
 public:
  static constexpr std::int32_t kNone = -1;

  struct Node {
    BoundingBox<D> box = BoundingBox<D>::empty();
    double split = 0;
    std::int32_t left = kNone;
    std::int32_t right = kNone;
    std::int32_t first = 0;  // leaf: offset into the point array
    std::int32_t count = 0;  // leaf: stored points (live + tombstoned)
    std::int32_t live = 0;   // live points in this subtree
    std::uint8_t dim = 0;
    NodeKind kind = NodeKind::Vacant;
  };

  StaticTree() = default;  // empty sentinel

  static StaticTree build_veb(std::vector<Point<D>> points, Heuristic h,
                              int leaf_cap = kDefaultLeafCap);
  static StaticTree build_heap(std::vector<Point<D>> points, Heuristic h,
                               int leaf_cap = kDefaultLeafCap,
                               int start_dim = 0);

  // Tombstones every live stored point coordinate-equal to some batch point
  // (ids are not consulted), contracts single-child internals, and returns
  // the number of points newly tombstoned.
  std::size_t erase_batch(std::span<const Point<D>> batch);

  // Merges this tree's k nearest live points into buf.
  void knn_single(const Point<D>& q, KnnBuffer& buf) const;

  std::vector<Point<D>> collect_live() const;

  bool empty() const { return root_ == kNone; }
  std::size_t live() const { return live_; }
  std::size_t capacity() const { return capacity_; }
  Heuristic heuristic() const { return heur_; }
  TreeLayout layout() const { return layout_; }
  int leaf_cap() const { return leaf_cap_; }

  std::int32_t root() const { return root_; }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Point<D>> points() const { return pts_; }
  bool point_live(std::int64_t i) const { return live_bit(i); }

  void ensure_bloom(int bits_per_key, int hashes) {
    if (bloom_) return;
    auto pts = collect_live();
    bloom_ = BloomFilter::build<D>(pts, bits_per_key, hashes);
  }
  const BloomFilter* bloom() const { return bloom_ ? &*bloom_ : nullptr; }

 private:
  // ---- shared helpers ----

  bool live_bit(std::int64_t i) const {
    return (live_bits_[i >> 6] >> (i & 63)) & 1;
  }
  void clear_live_bit_atomic(std::int64_t i) {
    std::atomic_ref<std::uint64_t> w(live_bits_[i >> 6]);
    w.fetch_and(~(1ULL << (i & 63)), std::memory_order_relaxed);
  }

  void place_leaf(std::int64_t idx, std::int64_t lo, std::int64_t hi,
                  std::uint8_t dim) {
    Node& nd = nodes_[idx];
    nd.kind = NodeKind::Leaf;
    nd.first = static_cast<std::int32_t>(lo);
    nd.count = static_cast<std::int32_t>(hi - lo);
    nd.live = nd.count;
    nd.dim = dim;
    nd.box = BoundingBox<D>::empty();
    for (std::int64_t i = lo; i < hi; ++i) nd.box.extend(pts_[i]);
  }

  // Object-median split of pts_[lo, hi): reorders so the first ceil(s/2)
  // points have coordinate <= split value in `dim`; returns (value, mid).
  std::pair<double, std::int64_t> median_split(std::int64_t lo,
                                               std::int64_t hi, int dim) {
    std::span<Point<D>> sp(pts_.data() + lo, static_cast<std::size_t>(hi - lo));
    const std::int64_t m = static_cast<std::int64_t>(parprim::median_partition(
        sp, [dim](const Point<D>& p) { return p.x[dim]; }));
    return {pts_[lo + m - 1].x[dim], lo + m};
  }

  // ---- object-median vEB construction (Alg. 1) ----

  static int levels(std::int64_t s, int cap) {
    int l = 1;
    while (s > cap) {
      s -= s / 2;  // ceil(s/2)
      ++l;
    }
    return l;
  }

  // Leaf segments produced by budgeted median construction over s points.
  static std::int64_t seg_count(std::int64_t s, int cap) {
    if (s <= cap) return 1;
    return seg_count(s - s / 2, cap) + seg_count(s / 2, cap);
  }

  struct Boundary {
    std::int64_t lo = 0, hi = 0;
    std::int32_t parent = kNone;
    bool right_side = false;
  };

  void wire(const Boundary& b, std::int64_t child) {
    Node& p = nodes_[b.parent];
    (b.right_side ? p.right : p.left) = static_cast<std::int32_t>(child);
  }

  // Builds a complete internal tree of l levels over pts_[lo, hi) at
  // [idx, idx + 2^l - 1); emits the 2^l boundary subranges left-to-right.
  void build_object_top(std::int64_t lo, std::int64_t hi, std::int64_t idx,
                        int dim, int l, Boundary* out) {
    if (l == 1) {
      assert(hi - lo >= 2);
      auto [value, mid] = median_split(lo, hi, dim);
      Node& nd = nodes_[idx];
      nd.kind = NodeKind::Internal;
      nd.dim = static_cast<std::uint8_t>(dim);
      nd.split = value;
      out[0] = {lo, mid, static_cast<std::int32_t>(idx), false};
      out[1] = {mid, hi, static_cast<std::int32_t>(idx), true};
      return;
    }
    const int lb = static_cast<int>(hyperceiling((l + 1) / 2));
    const int lt = l - lb;
    const std::int64_t nt = std::int64_t{1} << lt;
    const std::int64_t stride = (std::int64_t{1} << lb) - 1;
    std::vector<Boundary> upper(nt);
    build_object_top(lo, hi, idx, dim, lt, upper.data());
    const std::int64_t idx_b = idx + nt - 1;
    exec::parallel_for(
        0, static_cast<std::size_t>(nt),
        [&](std::size_t i) {
          const std::int64_t child = idx_b + static_cast<std::int64_t>(i) * stride;
          wire(upper[i], child);
          build_object_top(upper[i].lo, upper[i].hi, child, (dim + lt) % D, lb,
                           out + (i << lb));
        },
        /*grain=*/1);
  }

  // Bottom-role recursion: lays the subtree over pts_[lo, hi) at idx using
  // exactly 2*seg(s)-1 consecutive node slots.
  void build_object_bottom(std::int64_t lo, std::int64_t hi, std::int64_t idx,
                           int dim) {
    const std::int64_t s = hi - lo;
    if (s <= leaf_cap_) {
      place_leaf(idx, lo, hi, static_cast<std::uint8_t>(dim));
      return;
    }
    const int l = levels(s, leaf_cap_);
    const int lb = static_cast<int>(hyperceiling((l + 1) / 2));
    const int lt = l - lb;
    const std::int64_t nt = std::int64_t{1} << lt;
    std::vector<Boundary> frontier(nt);
    build_object_top(lo, hi, idx, dim, lt, frontier.data());
    const std::int64_t idx_b = idx + nt - 1;

    // start offset of each bottom subtree within the shared array
    std::vector<std::int64_t> spans(nt);
    for (std::int64_t i = 0; i < nt; ++i) {
      spans[i] = 2 * seg_count(frontier[i].hi - frontier[i].lo, leaf_cap_) - 1;
    }
    auto [offsets, total] = parprim::prefix_sum<std::int64_t>(
        spans, [](std::int64_t a, std::int64_t b) { return a + b; }, 0);
    (void)total;

    exec::parallel_for(
        0, static_cast<std::size_t>(nt),
        [&](std::size_t i) {
          const std::int64_t child = idx_b + offsets[i];
          wire(frontier[i], child);
          build_object_bottom(frontier[i].lo, frontier[i].hi, child,
                              (dim + lt) % D);
        },
        /*grain=*/1);

    // fill boxes and live counts of the top region; children of any top node
    // sit at strictly larger indices, so one reverse sweep suffices
    for (std::int64_t j = idx + nt - 2; j >= idx; --j) {
      Node& nd = nodes_[j];
      const Node& l_child = nodes_[nd.left];
      const Node& r_child = nodes_[nd.right];
      nd.box = l_child.box;
      nd.box.extend(r_child.box);
      nd.live = l_child.live + r_child.live;
    }
  }

  // ---- level-order construction (heap layout and spatial-median trees) ----

  void build_level_order(Heuristic h, int start_dim) {
    struct Item {
      std::int64_t lo, hi;
      std::int32_t parent;
      std::uint8_t right_side;
      std::uint8_t dim;
    };
    const std::int64_t n = static_cast<std::int64_t>(pts_.size());
    std::vector<Item> frontier{
        {0, n, kNone, 0, static_cast<std::uint8_t>(start_dim)}};
    struct Split {
      bool internal = false;
      std::int64_t mid = 0;
      std::uint8_t next_dim = 0;
    };
    while (!frontier.empty()) {
      const std::size_t base = nodes_.size();
      nodes_.resize(base + frontier.size());
      std::vector<Split> splits(frontier.size());
      exec::parallel_for(
          0, frontier.size(),
          [&](std::size_t i) {
            const Item& it = frontier[i];
            const std::int64_t idx = static_cast<std::int64_t>(base + i);
            if (it.parent != kNone) {
              Node& p = nodes_[it.parent];
              (it.right_side ? p.right : p.left) =
                  static_cast<std::int32_t>(idx);
            }
            const std::int64_t s = it.hi - it.lo;
            if (s <= leaf_cap_) {
              place_leaf(idx, it.lo, it.hi, it.dim);
              return;
            }
            if (h == Heuristic::ObjectMedian) {
              auto [value, mid] = median_split(it.lo, it.hi, it.dim);
              Node& nd = nodes_[idx];
              nd.kind = NodeKind::Internal;
              nd.dim = it.dim;
              nd.split = value;
              splits[i] = {true, mid, static_cast<std::uint8_t>((it.dim + 1) % D)};
              return;
            }
            // spatial median; skip degenerate dimensions, leaf if all are
            std::span<const Point<D>> sp(pts_.data() + it.lo,
                                         static_cast<std::size_t>(s));
            int dim = it.dim;
            double mn = 0, mx = 0;
            bool found = false;
            for (int t = 0; t < D; ++t) {
              dim = (it.dim + t) % D;
              mn = parprim::transform_reduce<double>(
                  sp, [dim](const Point<D>& p) { return p.x[dim]; },
                  [](double a, double b) { return a < b ? a : b; },
                  std::numeric_limits<double>::infinity());
              mx = parprim::transform_reduce<double>(
                  sp, [dim](const Point<D>& p) { return p.x[dim]; },
                  [](double a, double b) { return a > b ? a : b; },
                  -std::numeric_limits<double>::infinity());
              if (mn < mx) {
                found = true;
                break;
              }
            }
            if (!found) {  // all points identical: one oversized leaf
              place_leaf(idx, it.lo, it.hi, it.dim);
              return;
            }
            const double value = (mn + mx) / 2;
            std::span<Point<D>> msp(pts_.data() + it.lo,
                                    static_cast<std::size_t>(s));
            const std::int64_t cnt = static_cast<std::int64_t>(
                parprim::partition(msp, [dim, value](const Point<D>& p) {
                  return p.x[dim] <= value;
                }));
            assert(cnt > 0 && cnt < s);
            Node& nd = nodes_[idx];
            nd.kind = NodeKind::Internal;
            nd.dim = static_cast<std::uint8_t>(dim);
            nd.split = value;
            splits[i] = {true, it.lo + cnt,
                         static_cast<std::uint8_t>((dim + 1) % D)};
          },
          /*grain=*/1);
      std::vector<Item> next;
      next.reserve(frontier.size());
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        if (!splits[i].internal) continue;
        const Item& it = frontier[i];
        const std::int32_t idx = static_cast<std::int32_t>(base + i);
        next.push_back({it.lo, splits[i].mid, idx, 0, splits[i].next_dim});
        next.push_back({splits[i].mid, it.hi, idx, 1, splits[i].next_dim});
      }
      frontier = std::move(next);
    }
    // boxes and live counts for internals: children follow parents in
    // level order, so sweep in reverse
    for (std::int64_t j = static_cast<std::int64_t>(nodes_.size()) - 1; j >= 0;
         --j) {
      Node& nd = nodes_[j];
      if (nd.kind != NodeKind::Internal) continue;
      const Node& l_child = nodes_[nd.left];
      const Node& r_child = nodes_[nd.right];
      nd.box = l_child.box;
      nd.box.extend(r_child.box);
      nd.live = l_child.live + r_child.live;
    }
  }

  // ---- deletion (Alg. 2) ----

  struct EraseResult {
    std::int32_t replacement = kNone;
    std::int64_t removed = 0;
  };

  EraseResult erase_rec(std::int32_t idx, std::span<Point<D>> q) {
    Node& nd = nodes_[idx];
    if (q.empty()) return {idx, 0};
    if (nd.kind == NodeKind::Leaf) {
      std::int64_t removed = 0;
      for (std::int64_t i = nd.first; i < nd.first + nd.count; ++i) {
        if (!live_bit(i)) continue;
        for (const Point<D>& del : q) {
          if (coords_equal(pts_[i], del)) {
            clear_live_bit_atomic(i);
            ++removed;
            break;
          }
        }
      }
      nd.live -= static_cast<std::int32_t>(removed);
      if (nd.live == 0) {
        nd.kind = NodeKind::Vacant;
        return {kNone, removed};
      }
      return {idx, removed};
    }

    // Partition the batch around the split. Stored points equal to the split
    // value may live on either side, so equal batch points visit both.
    const int dim = nd.dim;
    const double value = nd.split;
    auto [n_lt, n_eq] = parprim::partition_three_way(
        q, [dim](const Point<D>& p) { return p.x[dim]; }, value);
    std::span<Point<D>> left_q = q.subspan(0, n_lt + n_eq);
    std::vector<Point<D>> eq_copy;
    std::span<Point<D>> right_q;
    if (n_eq == 0) {
      right_q = q.subspan(n_lt);
    } else {
      eq_copy.assign(q.begin() + n_lt, q.end());
      right_q = eq_copy;
    }

    EraseResult lres{nd.left, 0}, rres{nd.right, 0};
    const bool par = q.size() >= exec::kSerialCutoff;
    exec::invoke(
        par,
        [&] {
          if (!left_q.empty()) lres = erase_rec(nd.left, left_q);
        },
        [&] {
          if (!right_q.empty()) rres = erase_rec(nd.right, right_q);
        });
    const std::int64_t removed = lres.removed + rres.removed;
    nd.live -= static_cast<std::int32_t>(removed);
    if (lres.replacement != kNone && rres.replacement != kNone) {
      nd.left = lres.replacement;
      nd.right = rres.replacement;
      return {idx, removed};
    }
    nd.kind = NodeKind::Vacant;
    if (lres.replacement == kNone && rres.replacement == kNone) {
      return {kNone, removed};
    }
    return {lres.replacement != kNone ? lres.replacement : rres.replacement,
            removed};
  }

  // ---- k-NN (single tree, single query) ----

  void absorb(std::int32_t idx, const Point<D>& q, KnnBuffer& buf) const {
    const Node& nd = nodes_[idx];
    if (nd.kind == NodeKind::Leaf) {
      for (std::int64_t i = nd.first; i < nd.first + nd.count; ++i) {
        if (live_bit(i)) buf.insert(pts_[i].id, squared_distance(pts_[i], q));
      }
      return;
    }
    absorb(nd.left, q, buf);
    absorb(nd.right, q, buf);
  }

  void knn_rec(std::int32_t idx, const Point<D>& q, KnnBuffer& buf) const {
    const Node& nd = nodes_[idx];
    if (nd.kind == NodeKind::Leaf) {
      for (std::int64_t i = nd.first; i < nd.first + nd.count; ++i) {
        if (live_bit(i)) buf.insert(pts_[i].id, squared_distance(pts_[i], q));
      }
      return;
    }
    const bool go_left = q.x[nd.dim] <= nd.split;
    const std::int32_t near = go_left ? nd.left : nd.right;
    const std::int32_t far = go_left ? nd.right : nd.left;
    knn_rec(near, q, buf);
    if (!buf.full()) {
      absorb(far, q, buf);
      return;
    }
    switch (box_sphere_relation(nodes_[far].box, q, buf.bound())) {
      case BoxSphere::Disjoint:
        return;
      case BoxSphere::Contained:
        absorb(far, q, buf);
        return;
      case BoxSphere::Intersecting:
        knn_rec(far, q, buf);
        return;
    }
  }

  void collect_rec(std::int32_t idx, std::span<Point<D>> out) const {
    const Node& nd = nodes_[idx];
    if (nd.kind == NodeKind::Leaf) {
      std::size_t o = 0;
      for (std::int64_t i = nd.first; i < nd.first + nd.count; ++i) {
        if (live_bit(i)) out[o++] = pts_[i];
      }
      assert(o == static_cast<std::size_t>(nd.live));
      return;
    }
    const std::size_t left_live = nodes_[nd.left].live;
    exec::invoke(
        out.size() >= exec::kSerialCutoff,
        [&] { collect_rec(nd.left, out.subspan(0, left_live)); },
        [&] { collect_rec(nd.right, out.subspan(left_live)); });
  }

  std::vector<Node> nodes_;
  std::vector<Point<D>> pts_;  // permuted into leaf order by construction
  std::vector<std::uint64_t> live_bits_;
  std::int32_t root_ = kNone;
  std::size_t capacity_ = 0;
  std::size_t live_ = 0;
  Heuristic heur_ = Heuristic::ObjectMedian;
  TreeLayout layout_ = TreeLayout::Veb;
  int leaf_cap_ = kDefaultLeafCap;
  std::optional<BloomFilter> bloom_;
};

template <int D>
StaticTree<D> StaticTree<D>::build_veb(std::vector<Point<D>> points,
                                       Heuristic h, int leaf_cap) {
  StaticTree t;
  t.heur_ = h;
  t.leaf_cap_ = leaf_cap;
  t.capacity_ = points.size();
  t.live_ = points.size();
  t.pts_ = std::move(points);
  const std::int64_t n = static_cast<std::int64_t>(t.pts_.size());
  if (n == 0) return t;
  t.live_bits_.assign((n + 63) / 64, ~std::uint64_t{0});
  if (h == Heuristic::ObjectMedian) {
    t.layout_ = TreeLayout::Veb;
    t.nodes_.assign(2 * seg_count(n, leaf_cap) - 1, Node{});
    t.build_object_bottom(0, n, 0, 0);
  } else {
    t.layout_ = TreeLayout::LevelOrder;
    t.build_level_order(h, 0);
  }
  t.root_ = 0;
  return t;
}

template <int D>
StaticTree<D> StaticTree<D>::build_heap(std::vector<Point<D>> points,
                                        Heuristic h, int leaf_cap,
                                        int start_dim) {
  StaticTree t;
  t.heur_ = h;
  t.leaf_cap_ = leaf_cap;
  t.capacity_ = points.size();
  t.live_ = points.size();
  t.pts_ = std::move(points);
  const std::int64_t n = static_cast<std::int64_t>(t.pts_.size());
  if (n == 0) return t;
  t.live_bits_.assign((n + 63) / 64, ~std::uint64_t{0});
  t.layout_ = TreeLayout::LevelOrder;
  t.build_level_order(h, start_dim);
  t.root_ = 0;
  return t;
}

template <int D>
std::size_t StaticTree<D>::erase_batch(std::span<const Point<D>> batch) {
  if (empty() || batch.empty()) return 0;
  std::vector<Point<D>> scratch(batch.begin(), batch.end());
  const EraseResult res = erase_rec(root_, scratch);
  root_ = res.replacement;
  live_ -= static_cast<std::size_t>(res.removed);
  assert(root_ != kNone || live_ == 0);
  return static_cast<std::size_t>(res.removed);
}

template <int D>
void StaticTree<D>::knn_single(const Point<D>& q, KnnBuffer& buf) const {
  if (root_ == kNone) return;
  knn_rec(root_, q, buf);
}

template <int D>
std::vector<Point<D>> StaticTree<D>::collect_live() const {
  std::vector<Point<D>> out(live_);
  if (root_ != kNone && live_ > 0) collect_rec(root_, out);
  return out;
}

}  // namespace bdl
