#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "bdl/baselines.hpp"
#include "bdl/bdl_tree.hpp"
#include "support/oracles.hpp"
#include "support/testgen.hpp"

using namespace bdl;

namespace {

template <int D>
bool same_shape(const StaticTree<D>& a, const StaticTree<D>& b) {
  if (a.nodes().size() != b.nodes().size()) return false;
  for (std::size_t i = 0; i < a.nodes().size(); ++i) {
    const auto& x = a.nodes()[i];
    const auto& y = b.nodes()[i];
    if (x.kind != y.kind || x.left != y.left || x.right != y.right ||
        x.count != y.count || x.dim != y.dim) {
      return false;
    }
    if (x.kind == NodeKind::Internal && x.split != y.split) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("b1 insert-then-erase restores a structurally fresh tree") {
  auto pts = testgen::uniform_points<2>(500, 70);  // below the parallel-sort
                                                   // cutoff: builds are
                                                   // deterministic replays
  B1Tree<2> t;
  t.insert(pts);
  auto fresh = StaticTree<2>::build_veb(pts, Heuristic::ObjectMedian);
  REQUIRE(same_shape(t.tree(), fresh));

  auto extra = testgen::uniform_points<2>(120, 71, 100.0, 1000);
  t.insert(extra);
  CHECK(t.total_live() == 620);
  CHECK(t.erase(extra) == 120);
  CHECK(t.total_live() == 500);
  CHECK(same_shape(t.tree(), fresh));
}

TEST_CASE("b1 erase of absent points still rebuilds over the same multiset") {
  auto pts = testgen::uniform_points<3>(300, 72);
  B1Tree<3> t;
  t.insert(pts);
  auto strangers = testgen::uniform_points<3>(40, 73, 100.0, 5000);
  CHECK(t.erase(strangers) == 0);
  CHECK(t.total_live() == 300);
  auto queries = testgen::uniform_points<3>(50, 74);
  CHECK(t.knn(queries, 5) == oracle::brute_knn_all<3>(pts, queries, 5));
}

TEST_CASE("b2 reproduces the two-point insertion picture") {
  // spatial-median tree over (1,1), (3,3); root splits dim 0 at 2
  std::vector<Point<2>> init{{{1, 1}, 0}, {{3, 3}, 1}};
  B2Tree<2> t(Heuristic::SpatialMedian, /*leaf_cap=*/1);
  t.insert(init);
  const auto root_before = t.nodes()[t.root()];
  REQUIRE(root_before.kind == NodeKind::Internal);
  CHECK(root_before.split == 2.0);
  CHECK(root_before.dim == 0);
  const auto right_before = root_before.right;

  std::vector<Point<2>> more{{{5, 5}, 2}, {{7, 7}, 3}};
  t.insert(more);

  // root split unchanged; both new points landed in the right subtree
  const auto& root_after = t.nodes()[t.root()];
  CHECK(root_after.split == 2.0);
  CHECK(root_after.dim == 0);
  CHECK(root_after.right == right_before);
  CHECK(t.nodes()[root_after.left].live == 1);
  CHECK(t.nodes()[root_after.right].live == 3);

  auto queries = testgen::uniform_points<2>(20, 75, 8.0);
  std::vector<Point<2>> all = init;
  all.insert(all.end(), more.begin(), more.end());
  CHECK(t.knn(queries, 2) == oracle::brute_knn_all<2>(all, queries, 2));
}

TEST_CASE("b2 insert into an empty tree is a fresh build") {
  auto pts = testgen::uniform_points<3>(800, 76);
  B2Tree<3> t;
  t.insert(pts);
  CHECK(t.total_live() == 800);
  auto queries = testgen::uniform_points<3>(50, 77);
  CHECK(t.knn(queries, 5) == oracle::brute_knn_all<3>(pts, queries, 5));
}

TEST_CASE("b2 stays exact as inserts skew the partition") {
  B2Tree<2> t;
  std::vector<Point<2>> all;
  std::uint32_t next_id = 0;
  for (int wave = 0; wave < 6; ++wave) {
    // shifted clusters stress the frozen splits
    auto batch = testgen::uniform_points<2>(400, 78 + wave, 10.0, next_id);
    for (auto& p : batch) p.x[0] += wave * 50.0;
    next_id += batch.size();
    t.insert(batch);
    all.insert(all.end(), batch.begin(), batch.end());
    auto queries = testgen::uniform_points<2>(30, 90 + wave, 300.0);
    REQUIRE(t.knn(queries, 5) == oracle::brute_knn_all<2>(all, queries, 5));
  }
}

TEST_CASE("b2 erase tombstones without structural change") {
  auto pts = testgen::uniform_points<3>(1000, 95);
  B2Tree<3> t;
  t.insert(pts);
  const auto before = t.split_fingerprint();
  const std::size_t nodes_before = t.nodes().size();

  std::vector<Point<3>> batch(pts.begin(), pts.begin() + 400);
  CHECK(t.erase(batch) == 400);
  CHECK(t.split_fingerprint() == before);
  CHECK(t.nodes().size() == nodes_before);
  CHECK(t.total_live() == 600);

  std::vector<Point<3>> survivors(pts.begin() + 400, pts.end());
  auto queries = testgen::uniform_points<3>(50, 96);
  CHECK(t.knn(queries, 5) == oracle::brute_knn_all<3>(survivors, queries, 5));

  SUBCASE("erase everything keeps the structure") {
    CHECK(t.erase(survivors) == 600);
    CHECK(t.total_live() == 0);
    CHECK(t.split_fingerprint() == before);
    CHECK(t.knn(queries, 5) == KnnResult(queries.size()));
  }
}

TEST_CASE("b2 tombstoned and live copies may share a leaf") {
  std::vector<Point<2>> pts = testgen::uniform_points<2>(50, 97);
  B2Tree<2> t;
  t.insert(pts);
  std::vector<Point<2>> one{pts[7]};
  CHECK(t.erase(one) == 1);
  // re-insert the same coordinates under a new id
  Point<2> again = pts[7];
  again.id = 999;
  t.insert(std::vector<Point<2>>{again});
  auto res = t.knn(std::vector<Point<2>>{pts[7]}, 1);
  REQUIRE(res[0].size() == 1);
  CHECK(res[0][0].id == 999);  // only the live copy is visible
  CHECK(res[0][0].dist2 == 0.0);
}

TEST_CASE("all three implementations answer identically over a script") {
  std::mt19937_64 rng(99);
  typename BdlTree<3>::Config cfg;
  cfg.buffer_cap = 64;
  BdlTree<3> bdl(cfg);
  B1Tree<3> b1;
  B2Tree<3> b2;
  oracle::ReplayOracle<3> replay;

  std::uint32_t next_id = 0;
  std::vector<Point<3>> alive;
  auto queries = testgen::uniform_points<3>(50, 98, 80.0, 800000);

  for (int step = 0; step < 14; ++step) {
    if (alive.empty() || rng() % 2) {
      auto batch =
          testgen::uniform_points<3>(1 + rng() % 128, 200 + step, 80.0,
                                     next_id);
      next_id += batch.size();
      bdl.insert(batch);
      b1.insert(batch);
      b2.insert(batch);
      replay.insert(batch);
    } else {
      std::shuffle(alive.begin(), alive.end(), rng);
      std::vector<Point<3>> batch(
          alive.begin(), alive.begin() + 1 + rng() % alive.size());
      const std::size_t removed = replay.erase(batch);
      CHECK(bdl.erase(batch) == removed);
      CHECK(b1.erase(batch) == removed);
      CHECK(b2.erase(batch) == removed);
    }
    alive = replay.points();

    const auto want = oracle::brute_knn_all<3>(alive, queries, 5);
    REQUIRE(bdl.knn(queries, 5) == want);
    REQUIRE(b1.knn(queries, 5) == want);
    REQUIRE(b2.knn(queries, 5) == want);
  }
}
