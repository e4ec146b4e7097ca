#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <random>

#include "bdl/knn_buffer.hpp"

using namespace bdl;

TEST_CASE("nearest of two survives compaction at k=1") {
  KnnBuffer buf(1);
  buf.insert(0, 5.0);
  buf.insert(1, 3.0);  // fills the 2k=2 buffer, triggers selection
  auto out = buf.finalize();
  REQUIRE(out.size() == 1);
  CHECK(out[0].dist2 == 3.0);
  CHECK(out[0].id == 1);
}

TEST_CASE("k=2 over [9,1,4,7] keeps {1,4}") {
  KnnBuffer buf(2);
  for (auto [id, d] : {std::pair<std::uint32_t, double>{0, 9},
                       {1, 1},
                       {2, 4},
                       {3, 7}}) {
    buf.insert(id, d);
  }
  auto out = buf.finalize();
  REQUIRE(out.size() == 2);
  CHECK(out[0].dist2 == 1.0);
  CHECK(out[1].dist2 == 4.0);
}

TEST_CASE("bound stays infinite while under-full") {
  KnnBuffer buf(3);
  buf.insert(0, 1.0);
  buf.insert(1, 2.0);
  CHECK(buf.bound() == std::numeric_limits<double>::infinity());
  CHECK(!buf.full());
  buf.insert(2, 3.0);
  CHECK(buf.full());
  CHECK(buf.bound() == 3.0);
}

TEST_CASE("empty buffer finalizes empty") {
  KnnBuffer buf(4);
  CHECK(buf.finalize().empty());
}

TEST_CASE("finalize equals sort-oracle top-k on random inserts") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0, 100);
  KnnBuffer buf(5);
  std::vector<Neighbor> all;
  for (std::uint32_t i = 0; i < 1000; ++i) {
    const double d = dist(rng);
    buf.insert(i, d);
    all.push_back({i, d});
  }
  std::sort(all.begin(), all.end(), neighbor_less);
  all.resize(5);
  CHECK(buf.finalize() == all);
}

TEST_CASE("distance ties order by id ascending") {
  KnnBuffer buf(3);
  buf.insert(9, 2.0);
  buf.insert(4, 2.0);
  buf.insert(7, 2.0);
  buf.insert(1, 2.0);
  buf.insert(2, 5.0);
  auto out = buf.finalize();
  REQUIRE(out.size() == 3);
  CHECK(out[0].id == 1);
  CHECK(out[1].id == 4);
  CHECK(out[2].id == 7);
}

TEST_CASE("ties with the current bound are not rejected") {
  KnnBuffer buf(1);
  buf.insert(8, 2.0);   // bound becomes 2.0
  buf.insert(3, 2.0);   // equal distance, smaller id must win
  auto out = buf.finalize();
  REQUIRE(out.size() == 1);
  CHECK(out[0].id == 3);
}

TEST_CASE("compaction count stays within ceil(m/k)+1 and bound is monotone") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(0, 1000);
  const int k = 10;
  const std::size_t m = 100000;
  KnnBuffer buf(k);
  double last_bound = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < m; ++i) {
    buf.insert(i, dist(rng));
    CHECK(buf.bound() <= last_bound);
    last_bound = buf.bound();
  }
  CHECK(buf.compaction_count() <= m / k + 1);
  CHECK(buf.size() <= 2 * static_cast<std::size_t>(k));
}
