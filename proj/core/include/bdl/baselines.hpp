#pragma once

#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "bdl/bdl_tree.hpp"
#include "bdl/hash.hpp"
#include "bdl/static_tree.hpp"

namespace bdl {

// Data-parallel k-NN over any tree exposing knn_single.
template <int D, typename Tree>
KnnResult batch_knn(const Tree& tree, std::span<const Point<D>> queries,
                    int k) {
  KnnResult out(queries.size());
  exec::parallel_for(0, queries.size(), [&](std::size_t qi) {
    KnnBuffer buf(k);
    tree.knn_single(queries[qi], buf);
    out[qi] = buf.finalize();
  });
  return out;
}

// Baseline 1: rebuilds a fresh vEB tree over the live multiset after every
// batch insertion and batch deletion.
template <int D>
class B1Tree {
 public:
  explicit B1Tree(Heuristic h = Heuristic::ObjectMedian,
                  int leaf_cap = kDefaultLeafCap)
      : heur_(h), leaf_cap_(leaf_cap) {}

  void insert(std::span<const Point<D>> batch) {
    live_pts_.insert(live_pts_.end(), batch.begin(), batch.end());
    rebuild();
  }

  std::size_t erase(std::span<const Point<D>> batch) {
    struct KeyHash {
      std::size_t operator()(const std::array<double, D>& k) const {
        return hash_bytes(k.data(), sizeof(k), 0x51ed270b7a03f944ULL);
      }
    };
    std::unordered_set<std::array<double, D>, KeyHash> victims;
    victims.reserve(batch.size());
    for (const Point<D>& p : batch) victims.insert(canonical_coords(p));
    const std::size_t before = live_pts_.size();
    std::erase_if(live_pts_, [&](const Point<D>& p) {
      return victims.contains(canonical_coords(p));
    });
    rebuild();
    return before - live_pts_.size();
  }

  KnnResult knn(std::span<const Point<D>> queries, int k) const {
    return batch_knn<D>(tree_, queries, k);
  }

  std::size_t total_live() const { return live_pts_.size(); }
  const StaticTree<D>& tree() const { return tree_; }
  std::vector<Point<D>> collect_live() const { return live_pts_; }

 private:
  void rebuild() {
    tree_ = StaticTree<D>::build_veb(live_pts_, heur_, leaf_cap_);
  }

  std::vector<Point<D>> live_pts_;
  StaticTree<D> tree_;
  Heuristic heur_;
  int leaf_cap_;
};

// Baseline 2: never rebuilds. Inserts route through the existing spatial
// partition (internal splits are frozen once created; an overflowing leaf
// splits locally over its own points), deletions only tombstone.
template <int D>
class B2Tree {
 public:
  static constexpr std::int32_t kNone = -1;

  struct Node {
    BoundingBox<D> box = BoundingBox<D>::empty();
    double split = 0;
    std::int32_t left = kNone;
    std::int32_t right = kNone;
    std::int64_t live = 0;
    std::uint8_t dim = 0;  // internal: split dim; leaf: dim of a future split
    NodeKind kind = NodeKind::Vacant;
    std::vector<Point<D>> pts;       // leaf payload
    std::vector<std::uint8_t> alive;
  };

  explicit B2Tree(Heuristic h = Heuristic::ObjectMedian,
                  int leaf_cap = kDefaultLeafCap)
      : heur_(h), leaf_cap_(leaf_cap) {}

  void insert(std::span<const Point<D>> batch) {
    if (batch.empty()) return;
    if (root_ == kNone) {
      fresh_build(batch);
      return;
    }
    std::vector<Point<D>> scratch(batch.begin(), batch.end());
    route_insert(root_, scratch);
    const std::size_t snapshot = nodes_.size();
    for (std::size_t i = 0; i < snapshot; ++i) {
      if (nodes_[i].kind == NodeKind::Leaf &&
          nodes_[i].pts.size() > static_cast<std::size_t>(leaf_cap_)) {
        split_leaf(static_cast<std::int32_t>(i));
      }
    }
  }

  std::size_t erase(std::span<const Point<D>> batch) {
    if (root_ == kNone || batch.empty()) return 0;
    std::vector<Point<D>> scratch(batch.begin(), batch.end());
    return static_cast<std::size_t>(erase_rec(root_, scratch));
  }

  KnnResult knn(std::span<const Point<D>> queries, int k) const {
    return batch_knn<D>(*this, queries, k);
  }

  void knn_single(const Point<D>& q, KnnBuffer& buf) const {
    if (root_ != kNone && nodes_[root_].live > 0) knn_rec(root_, q, buf);
  }

  std::size_t total_live() const {
    return root_ == kNone ? 0 : static_cast<std::size_t>(nodes_[root_].live);
  }

  std::vector<Point<D>> collect_live() const {
    std::vector<Point<D>> out;
    out.reserve(total_live());
    if (root_ != kNone) collect_rec(root_, out);
    return out;
  }

  // The internal split set in preorder; frozen under erase by contract.
  std::vector<std::pair<int, double>> split_fingerprint() const {
    std::vector<std::pair<int, double>> out;
    if (root_ != kNone) fingerprint_rec(root_, out);
    return out;
  }

  std::span<const Node> nodes() const { return nodes_; }
  std::int32_t root() const { return root_; }

 private:
  void fresh_build(std::span<const Point<D>> batch) {
    auto sub = StaticTree<D>::build_heap(
        std::vector<Point<D>>(batch.begin(), batch.end()), heur_, leaf_cap_);
    nodes_.clear();
    nodes_.resize(sub.nodes().size());
    graft(sub, /*base=*/1, /*root_slot=*/0, nullptr, nullptr);  // identity map
    root_ = 0;
  }

  // Copies a freshly built static subtree into nodes_: subtree node 0 lands
  // in root_slot, node c > 0 lands at base + c - 1. When remapping a split
  // leaf, orig_pts/orig_alive recover the payload through temporary ids.
  void graft(const StaticTree<D>& sub, std::size_t base,
             std::size_t root_slot, const std::vector<Point<D>>* orig_pts,
             const std::vector<std::uint8_t>* orig_alive) {
    auto remap = [&](std::int32_t c) {
      return static_cast<std::int32_t>(c == 0 ? root_slot : base + c - 1);
    };
    const auto sub_nodes = sub.nodes();
    for (std::size_t c = 0; c < sub_nodes.size(); ++c) {
      Node& dst = nodes_[remap(static_cast<std::int32_t>(c))];
      const auto& src = sub_nodes[c];
      dst = Node{};
      dst.box = src.box;
      dst.dim = src.dim;
      if (src.kind == NodeKind::Internal) {
        dst.kind = NodeKind::Internal;
        dst.split = src.split;
        dst.left = remap(src.left);
        dst.right = remap(src.right);
      } else {
        dst.kind = NodeKind::Leaf;
        dst.pts.reserve(src.count);
        dst.alive.reserve(src.count);
        for (std::int32_t i = src.first; i < src.first + src.count; ++i) {
          const Point<D>& p = sub.points()[i];
          if (orig_pts) {
            dst.pts.push_back((*orig_pts)[p.id]);
            dst.alive.push_back((*orig_alive)[p.id]);
          } else {
            dst.pts.push_back(p);
            dst.alive.push_back(1);
          }
        }
        dst.live = 0;
        for (std::uint8_t a : dst.alive) dst.live += a;
      }
    }
    // live counts for internals; children always map to larger slots than
    // their parent except the root, handled last
    for (std::size_t c = sub_nodes.size(); c-- > 0;) {
      Node& dst = nodes_[remap(static_cast<std::int32_t>(c))];
      if (dst.kind == NodeKind::Internal) {
        dst.live = nodes_[dst.left].live + nodes_[dst.right].live;
      }
    }
  }

  void route_insert(std::int32_t idx, std::span<Point<D>> q) {
    Node& nd = nodes_[idx];
    nd.live += static_cast<std::int64_t>(q.size());
    BoundingBox<D> bb = parprim::transform_reduce<BoundingBox<D>>(
        std::span<const Point<D>>(q.data(), q.size()),
        [](const Point<D>& p) {
          BoundingBox<D> b = BoundingBox<D>::empty();
          b.extend(p);
          return b;
        },
        [](BoundingBox<D> a, const BoundingBox<D>& b) {
          a.extend(b);
          return a;
        },
        BoundingBox<D>::empty());
    nd.box.extend(bb);
    if (nd.kind == NodeKind::Leaf) {
      for (const Point<D>& p : q) {
        nd.pts.push_back(p);
        nd.alive.push_back(1);
      }
      return;
    }
    const int dim = nd.dim;
    const double value = nd.split;
    const std::size_t cnt = parprim::partition(
        q, [dim, value](const Point<D>& p) { return p.x[dim] <= value; });
    std::span<Point<D>> lq = q.subspan(0, cnt);
    std::span<Point<D>> rq = q.subspan(cnt);
    exec::invoke(
        q.size() >= exec::kSerialCutoff,
        [&] {
          if (!lq.empty()) route_insert(nd.left, lq);
        },
        [&] {
          if (!rq.empty()) route_insert(nd.right, rq);
        });
  }

  void split_leaf(std::int32_t idx) {
    // temporary ids recover each stored point's alive flag after the rebuild
    std::vector<Point<D>> pts = std::move(nodes_[idx].pts);
    std::vector<std::uint8_t> alive = std::move(nodes_[idx].alive);
    std::vector<Point<D>> tmp(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      tmp[i] = Point<D>{pts[i].x, static_cast<std::uint32_t>(i)};
    }
    auto sub = StaticTree<D>::build_heap(std::move(tmp), heur_, leaf_cap_,
                                         nodes_[idx].dim);
    if (sub.nodes().size() == 1) {
      // degenerate: everything identical, keep one oversized leaf
      nodes_[idx].pts = std::move(pts);
      nodes_[idx].alive = std::move(alive);
      return;
    }
    const std::size_t base = nodes_.size();
    nodes_.resize(base + sub.nodes().size() - 1);
    graft(sub, base, static_cast<std::size_t>(idx), &pts, &alive);
  }

  std::int64_t erase_rec(std::int32_t idx, std::span<Point<D>> q) {
    Node& nd = nodes_[idx];
    if (q.empty()) return 0;
    if (nd.kind == NodeKind::Leaf) {
      std::int64_t removed = 0;
      for (std::size_t i = 0; i < nd.pts.size(); ++i) {
        if (!nd.alive[i]) continue;
        for (const Point<D>& del : q) {
          if (coords_equal(nd.pts[i], del)) {
            nd.alive[i] = 0;
            ++removed;
            break;
          }
        }
      }
      nd.live -= removed;
      return removed;
    }
    const int dim = nd.dim;
    const double value = nd.split;
    auto [n_lt, n_eq] = parprim::partition_three_way(
        q, [dim](const Point<D>& p) { return p.x[dim]; }, value);
    std::span<Point<D>> lq = q.subspan(0, n_lt + n_eq);
    std::vector<Point<D>> eq_copy;
    std::span<Point<D>> rq;
    if (n_eq == 0) {
      rq = q.subspan(n_lt);
    } else {
      eq_copy.assign(q.begin() + n_lt, q.end());
      rq = eq_copy;
    }
    std::int64_t lr = 0, rr = 0;
    exec::invoke(
        q.size() >= exec::kSerialCutoff,
        [&] {
          if (!lq.empty()) lr = erase_rec(nd.left, lq);
        },
        [&] {
          if (!rq.empty()) rr = erase_rec(nd.right, rq);
        });
    nd.live -= lr + rr;
    return lr + rr;
  }

  void knn_rec(std::int32_t idx, const Point<D>& q, KnnBuffer& buf) const {
    const Node& nd = nodes_[idx];
    if (nd.kind == NodeKind::Leaf) {
      for (std::size_t i = 0; i < nd.pts.size(); ++i) {
        if (nd.alive[i]) {
          buf.insert(nd.pts[i].id, squared_distance(nd.pts[i], q));
        }
      }
      return;
    }
    const std::int32_t l = nd.left, r = nd.right;
    const bool go_left = q.x[nd.dim] <= nd.split;
    const std::int32_t near = go_left ? l : r;
    const std::int32_t far = go_left ? r : l;
    if (nodes_[near].live > 0) knn_rec(near, q, buf);
    if (nodes_[far].live == 0) return;
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

  void absorb(std::int32_t idx, const Point<D>& q, KnnBuffer& buf) const {
    const Node& nd = nodes_[idx];
    if (nd.kind == NodeKind::Leaf) {
      for (std::size_t i = 0; i < nd.pts.size(); ++i) {
        if (nd.alive[i]) {
          buf.insert(nd.pts[i].id, squared_distance(nd.pts[i], q));
        }
      }
      return;
    }
    if (nodes_[nd.left].live > 0) absorb(nd.left, q, buf);
    if (nodes_[nd.right].live > 0) absorb(nd.right, q, buf);
  }

  void collect_rec(std::int32_t idx, std::vector<Point<D>>& out) const {
    const Node& nd = nodes_[idx];
    if (nd.kind == NodeKind::Leaf) {
      for (std::size_t i = 0; i < nd.pts.size(); ++i) {
        if (nd.alive[i]) out.push_back(nd.pts[i]);
      }
      return;
    }
    collect_rec(nd.left, out);
    collect_rec(nd.right, out);
  }

  void fingerprint_rec(std::int32_t idx,
                       std::vector<std::pair<int, double>>& out) const {
    const Node& nd = nodes_[idx];
    if (nd.kind != NodeKind::Internal) return;
    out.emplace_back(nd.dim, nd.split);
    fingerprint_rec(nd.left, out);
    fingerprint_rec(nd.right, out);
  }

  std::vector<Node> nodes_;
  std::int32_t root_ = kNone;
  Heuristic heur_;
  int leaf_cap_;
};

}  // namespace bdl
