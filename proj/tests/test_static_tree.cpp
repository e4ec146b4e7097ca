#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "bdl/static_tree.hpp"
#include "support/oracles.hpp"
#include "support/testgen.hpp"

using namespace bdl;

namespace {

template <int D>
void collect_subtree_points(const StaticTree<D>& t, std::int32_t idx,
                            std::vector<Point<D>>& out, bool live_only) {
  const auto& nd = t.nodes()[idx];
  if (nd.kind == NodeKind::Leaf) {
    for (std::int32_t i = nd.first; i < nd.first + nd.count; ++i) {
      if (!live_only || t.point_live(i)) out.push_back(t.points()[i]);
    }
    return;
  }
  REQUIRE(nd.kind == NodeKind::Internal);
  collect_subtree_points(t, nd.left, out, live_only);
  collect_subtree_points(t, nd.right, out, live_only);
}

// every live point left of a split is <= the split value (and >= on the
// right), checked by re-scanning the subtree
template <int D>
void check_partition_invariant(const StaticTree<D>& t, std::int32_t idx) {
  const auto& nd = t.nodes()[idx];
  if (nd.kind != NodeKind::Internal) return;
  std::vector<Point<D>> lpts, rpts;
  collect_subtree_points(t, nd.left, lpts, true);
  collect_subtree_points(t, nd.right, rpts, true);
  for (const auto& p : lpts) REQUIRE(p.x[nd.dim] <= nd.split);
  for (const auto& p : rpts) REQUIRE(p.x[nd.dim] >= nd.split);
  check_partition_invariant(t, nd.left);
  check_partition_invariant(t, nd.right);
}

template <int D>
void check_live_counts(const StaticTree<D>& t, std::int32_t idx) {
  const auto& nd = t.nodes()[idx];
  std::vector<Point<D>> live;
  collect_subtree_points(t, idx, live, true);
  REQUIRE(static_cast<std::int64_t>(live.size()) == nd.live);
  if (nd.kind == NodeKind::Internal) {
    check_live_counts(t, nd.left);
    check_live_counts(t, nd.right);
  }
}

// after contraction no reachable internal node may have a vacant child
template <int D>
void check_contraction_invariant(const StaticTree<D>& t, std::int32_t idx) {
  const auto& nd = t.nodes()[idx];
  REQUIRE(nd.kind != NodeKind::Vacant);
  if (nd.kind != NodeKind::Internal) return;
  REQUIRE(t.nodes()[nd.left].kind != NodeKind::Vacant);
  REQUIRE(t.nodes()[nd.right].kind != NodeKind::Vacant);
  REQUIRE(t.nodes()[nd.left].live > 0);
  REQUIRE(t.nodes()[nd.right].live > 0);
  check_contraction_invariant(t, nd.left);
  check_contraction_invariant(t, nd.right);
}

template <int D>
std::multiset<std::uint32_t> id_multiset(const std::vector<Point<D>>& pts) {
  std::multiset<std::uint32_t> out;
  for (const auto& p : pts) out.insert(p.id);
  return out;
}

template <int D>
std::pair<std::int64_t, std::int64_t> subtree_balance(const StaticTree<D>& t,
                                                      std::int32_t idx,
                                                      int leaf_cap) {
  const auto& nd = t.nodes()[idx];
  if (nd.kind == NodeKind::Leaf) return {nd.count, nd.count};
  auto [lsz, _l] = subtree_balance(t, nd.left, leaf_cap);
  auto [rsz, _r] = subtree_balance(t, nd.right, leaf_cap);
  REQUIRE(std::abs(lsz - rsz) <= leaf_cap);
  return {lsz + rsz, 0};
}

}  // namespace

TEST_CASE("hyperceiling") {
  CHECK(hyperceiling(1) == 1);
  CHECK(hyperceiling(2) == 2);
  CHECK(hyperceiling(5) == 8);
  CHECK(hyperceiling(1024) == 1024);
  CHECK_THROWS_AS(hyperceiling(0), std::invalid_argument);
}

TEST_CASE("vEB trace: 8 points, leaf cap 1") {
  auto pts = testgen::uniform_points<2>(8, 1);
  auto t = StaticTree<2>::build_veb(pts, Heuristic::ObjectMedian, 1);
  REQUIRE(t.nodes().size() == 15);
  REQUIRE(t.root() == 0);
  // top three nodes at 0..2, four bottom subtrees at 3, 6, 9, 12
  const auto ns = t.nodes();
  CHECK(ns[0].left == 1);
  CHECK(ns[0].right == 2);
  CHECK(ns[1].left == 3);
  CHECK(ns[1].right == 6);
  CHECK(ns[2].left == 9);
  CHECK(ns[2].right == 12);
  // split dimension cycles: depth 0 -> dim 0, depth 1 -> dim 1, depth 2 -> 0
  CHECK(ns[0].dim == 0);
  CHECK(ns[1].dim == 1);
  CHECK(ns[3].dim == 0);
}

TEST_CASE("single point builds a single leaf at index 0") {
  auto pts = testgen::uniform_points<3>(1, 2);
  auto t = StaticTree<3>::build_veb(pts, Heuristic::ObjectMedian);
  REQUIRE(t.nodes().size() == 1);
  CHECK(t.nodes()[0].kind == NodeKind::Leaf);
  CHECK(t.live() == 1);
}

TEST_CASE("empty input gives the empty sentinel") {
  auto t = StaticTree<2>::build_veb({}, Heuristic::ObjectMedian);
  CHECK(t.empty());
  CHECK(t.live() == 0);
  KnnBuffer buf(3);
  t.knn_single(Point<2>{{0, 0}, 0}, buf);  // no-op
  CHECK(buf.finalize().empty());
}

TEST_CASE("node indices match the independent address oracle, n in 1..64") {
  for (int cap : {1, 3}) {
    for (std::int64_t n = 1; n <= 64; ++n) {
      auto pts = testgen::uniform_points<2>(n, 100 + n);
      auto t = StaticTree<2>::build_veb(pts, Heuristic::ObjectMedian, cap);
      const auto want = oracle::veb_layout(n, cap);
      REQUIRE(t.nodes().size() == want.size());
      for (const auto& [idx, node] : want) {
        const auto& got = t.nodes()[idx];
        REQUIRE(got.kind == node.kind);
        if (node.kind == NodeKind::Internal) {
          REQUIRE(got.left == node.left);
          REQUIRE(got.right == node.right);
        } else {
          REQUIRE(got.count == node.count);
        }
      }
    }
  }
}

TEST_CASE("object median keeps sibling subtrees within leaf_cap of each other") {
  auto pts = testgen::uniform_points<3>(10000, 5);
  auto t = StaticTree<3>::build_veb(pts, Heuristic::ObjectMedian);
  subtree_balance(t, t.root(), t.leaf_cap());
  check_partition_invariant(t, t.root());
  check_live_counts(t, t.root());
}

TEST_CASE("spatial median tree satisfies the partition invariant") {
  auto pts = testgen::uniform_points<3>(5000, 6);
  auto t = StaticTree<3>::build_veb(pts, Heuristic::SpatialMedian);
  check_partition_invariant(t, t.root());
  check_live_counts(t, t.root());
  auto got = id_multiset(t.collect_live());
  CHECK(got == id_multiset(pts));
}

TEST_CASE("spatial split value is the midpoint of the coordinate range") {
  std::vector<Point<2>> pts{{{1, 1}, 0}, {{3, 3}, 1}};
  auto t = StaticTree<2>::build_veb(pts, Heuristic::SpatialMedian, 1);
  REQUIRE(t.nodes()[t.root()].kind == NodeKind::Internal);
  CHECK(t.nodes()[t.root()].split == 2.0);
  CHECK(t.nodes()[t.root()].dim == 0);
}

TEST_CASE("degenerate spatial split advances dimensions then collapses") {
  // all x equal: split must use dim 1 instead
  std::vector<Point<2>> pts{{{5, 1}, 0}, {{5, 2}, 1}, {{5, 3}, 2}};
  auto t = StaticTree<2>::build_veb(pts, Heuristic::SpatialMedian, 1);
  REQUIRE(t.nodes()[t.root()].kind == NodeKind::Internal);
  CHECK(t.nodes()[t.root()].dim == 1);

  // all points identical: one oversized leaf, regardless of leaf cap
  std::vector<Point<2>> same(5, Point<2>{{2, 2}, 0});
  for (std::uint32_t i = 0; i < 5; ++i) same[i].id = i;
  auto t2 = StaticTree<2>::build_veb(same, Heuristic::SpatialMedian, 1);
  REQUIRE(t2.nodes().size() == 1);
  CHECK(t2.nodes()[0].kind == NodeKind::Leaf);
  CHECK(t2.nodes()[0].count == 5);
}

TEST_CASE("heap layout basics") {
  auto pts = testgen::uniform_points<2>(2, 3);
  auto t = StaticTree<2>::build_heap(pts, Heuristic::ObjectMedian, 1);
  REQUIRE(t.nodes().size() == 3);
  CHECK(t.root() == 0);
  CHECK(t.nodes()[0].left == 1);
  CHECK(t.nodes()[0].right == 2);
  CHECK(t.nodes()[1].kind == NodeKind::Leaf);
  CHECK(t.nodes()[2].kind == NodeKind::Leaf);
}

TEST_CASE("complete heap trees obey the implicit child formula") {
  // 64 points, cap 1, object median: a perfect tree in level order
  auto pts = testgen::uniform_points<2>(64, 8);
  auto t = StaticTree<2>::build_heap(pts, Heuristic::ObjectMedian, 1);
  REQUIRE(t.nodes().size() == 127);
  for (std::size_t i = 0; i < t.nodes().size(); ++i) {
    if (t.nodes()[i].kind == NodeKind::Internal) {
      CHECK(t.nodes()[i].left == static_cast<std::int32_t>(2 * i + 1));
      CHECK(t.nodes()[i].right == static_cast<std::int32_t>(2 * i + 2));
    }
  }
}

TEST_CASE("heap and vEB layouts answer k-NN identically") {
  auto pts = testgen::uniform_points<3>(3000, 12);
  auto queries = testgen::uniform_points<3>(50, 13);
  for (auto h : {Heuristic::ObjectMedian, Heuristic::SpatialMedian}) {
    auto a = StaticTree<3>::build_veb(pts, h);
    auto b = StaticTree<3>::build_heap(pts, h);
    for (const auto& q : queries) {
      KnnBuffer ba(7), bb(7);
      a.knn_single(q, ba);
      b.knn_single(q, bb);
      REQUIRE(ba.finalize() == bb.finalize());
    }
  }
}

TEST_CASE("buffer-capacity build works at 1024 points") {
  auto pts = testgen::uniform_points<5>(1024, 14);
  auto t = StaticTree<5>::build_heap(pts, Heuristic::ObjectMedian);
  CHECK(t.live() == 1024);
  CHECK(id_multiset(t.collect_live()) == id_multiset(pts));
}

TEST_CASE("k-NN is exact against brute force across configurations") {
  std::mt19937_64 rng(15);
  for (auto h : {Heuristic::ObjectMedian, Heuristic::SpatialMedian}) {
    auto pts = testgen::uniform_points<2>(10000, 16);
    auto t = StaticTree<2>::build_veb(pts, h);
    auto queries = testgen::uniform_points<2>(100, 17);
    for (int k : {1, 5, 11}) {
      for (const auto& q : queries) {
        KnnBuffer buf(k);
        t.knn_single(q, buf);
        REQUIRE(buf.finalize() == oracle::brute_knn<2>(pts, q, k));
      }
    }
  }
}

TEST_CASE("k equal to n returns every live point") {
  auto pts = testgen::uniform_points<3>(200, 18);
  auto t = StaticTree<3>::build_veb(pts, Heuristic::ObjectMedian);
  KnnBuffer buf(200);
  t.knn_single(pts[0], buf);
  CHECK(buf.finalize().size() == 200);
}

TEST_CASE("duplicate coordinates are permitted and tie-break by id") {
  auto pts = testgen::gridded_points<2>(500, 19, 4);
  auto t = StaticTree<2>::build_veb(pts, Heuristic::ObjectMedian);
  check_partition_invariant(t, t.root());
  for (const auto& q : testgen::gridded_points<2>(30, 20, 4)) {
    KnnBuffer buf(5);
    t.knn_single(q, buf);
    REQUIRE(buf.finalize() == oracle::brute_knn<2>(pts, q, 5));
  }
}

TEST_CASE("erase_batch stated cases") {
  auto pts = testgen::uniform_points<2>(300, 21);
  SUBCASE("delete everything") {
    auto t = StaticTree<2>::build_veb(pts, Heuristic::ObjectMedian);
    CHECK(t.erase_batch(pts) == 300);
    CHECK(t.empty());
    CHECK(t.live() == 0);
    CHECK(t.collect_live().empty());
  }
  SUBCASE("delete nothing") {
    auto t = StaticTree<2>::build_veb(pts, Heuristic::ObjectMedian);
    CHECK(t.erase_batch({}) == 0);
    CHECK(t.live() == 300);
  }
  SUBCASE("absent points are ignored") {
    auto t = StaticTree<2>::build_veb(pts, Heuristic::ObjectMedian);
    auto strangers = testgen::uniform_points<2>(50, 22, 100.0, 9000);
    CHECK(t.erase_batch(strangers) == 0);
    CHECK(t.live() == 300);
  }
}

TEST_CASE("random half deletion: soundness, completeness, contraction, k-NN") {
  std::mt19937_64 rng(23);
  for (auto h : {Heuristic::ObjectMedian, Heuristic::SpatialMedian}) {
    auto pts = testgen::uniform_points<3>(4000, 24);
    auto t = StaticTree<3>::build_veb(pts, h);

    std::vector<Point<3>> batch;
    std::vector<Point<3>> survivors;
    for (const auto& p : pts) {
      if (rng() & 1) {
        batch.push_back(p);
      } else {
        survivors.push_back(p);
      }
    }
    CHECK(t.erase_batch(batch) == batch.size());
    CHECK(t.live() == survivors.size());
    CHECK(id_multiset(t.collect_live()) == id_multiset(survivors));
    check_contraction_invariant(t, t.root());
    check_live_counts(t, t.root());

    auto queries = testgen::uniform_points<3>(60, 25);
    for (const auto& q : queries) {
      KnnBuffer buf(5);
      t.knn_single(q, buf);
      REQUIRE(buf.finalize() == oracle::brute_knn<3>(survivors, q, 5));
    }
  }
}

TEST_CASE("deleting one duplicate coordinate removes all copies") {
  std::vector<Point<2>> pts = testgen::gridded_points<2>(64, 26, 3);
  auto t = StaticTree<2>::build_veb(pts, Heuristic::ObjectMedian);
  Point<2> victim = pts[10];
  std::size_t copies = 0;
  for (const auto& p : pts) copies += coords_equal(p, victim);
  CHECK(copies > 1);  // the 3x3 grid guarantees duplicates among 64 points
  Point<2> other_id = victim;
  other_id.id = 777777;  // ids must not matter
  CHECK(t.erase_batch(std::vector<Point<2>>{other_id}) == copies);
  for (const auto& p : t.collect_live()) {
    CHECK(!coords_equal(p, victim));
  }
}

TEST_CASE("collect_live matches the live counter after updates") {
  auto pts = testgen::uniform_points<4>(2000, 27);
  auto t = StaticTree<4>::build_veb(pts, Heuristic::ObjectMedian);
  CHECK(id_multiset(t.collect_live()) == id_multiset(pts));
  std::vector<Point<4>> batch(pts.begin(), pts.begin() + 700);
  t.erase_batch(batch);
  auto live = t.collect_live();
  CHECK(live.size() == t.live());
  CHECK(live.size() == 1300);
}
