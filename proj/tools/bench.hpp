#pragma once

#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bdl/bdl_tree.hpp"
#include "bdl/datagen.hpp"
#include "bdl/hash.hpp"
#include "bdl/io.hpp"
#include "bdl/static_tree.hpp"

namespace bdl::bench {

enum class Impl { Bdl, B1, B2 };

std::string impl_name(Impl i);
Impl parse_impl(const std::string& s);
std::string heuristic_name(Heuristic h);
Heuristic parse_heuristic(const std::string& s);

struct DatasetSpec {
  enum class Kind { Uniform, VisualVar, File };
  Kind kind = Kind::Uniform;
  std::uint64_t n = 0;
  std::uint32_t d = 0;
  std::uint64_t seed = 1;
  VisualVarParams vv;
  std::string path;
  FileFormat format = FileFormat::Binary;

  std::string describe() const;
};

RawPoints load_dataset(const DatasetSpec& spec);

struct BenchConfig {
  DatasetSpec dataset;
  Impl impl = Impl::Bdl;
  Heuristic heuristic = Heuristic::ObjectMedian;
  int threads = 0;  // 0: use every core
  std::uint64_t seed = 1;
  int runs = 3;
  int warmup = 1;
  std::vector<double> batch_pcts = {0.10};
  std::vector<std::uint64_t> batch_sizes;  // overrides pcts when non-empty
  std::vector<int> ks = {5};
  double query_pct = 1.0;
  bool validate = false;
  std::uint64_t validate_cap = 50000;
  std::size_t buffer_cap = 1024;
  int leaf_cap = kDefaultLeafCap;
  bool use_bloom = true;
};

// One benchmark measurement row. Medians are exact medians of run_seconds;
// checksum digests the non-timing outcome (live multiset or k-NN answers) so
// result determinism is checkable from the CSV alone.
struct BenchResult {
  std::string implementation;
  std::string operation;
  std::string dataset;
  std::string heuristic;
  int threads = 0;
  std::uint64_t batch_size = 0;  // 0 when not applicable
  int k = 0;                     // 0 when not applicable
  int runs = 0;
  int warmup = 0;
  double median_seconds = 0;
  std::vector<double> run_seconds;
  std::uint64_t checksum = 0;
};

void emit_csv(std::span<const BenchResult> results, std::ostream& out);
void emit_csv(std::span<const BenchResult> results, const std::string& path);
std::vector<BenchResult> parse_csv(std::istream& in);
extern const char* const kCsvHeader;

BenchResult run_build(const BenchConfig& cfg);
std::vector<BenchResult> run_insert(const BenchConfig& cfg);
std::vector<BenchResult> run_delete(const BenchConfig& cfg);
std::vector<BenchResult> run_knn(const BenchConfig& cfg);
std::vector<BenchResult> run_mixed(const BenchConfig& cfg);

double median_of(std::vector<double> xs);

// Deterministic in-place Fisher-Yates driven by the counter RNG.
void shuffle_indices(std::vector<std::uint64_t>& idx, std::uint64_t seed);

// Order-independent digest of a point multiset.
template <int D>
std::uint64_t state_checksum(std::span<const Point<D>> pts) {
  std::uint64_t acc = 0;
  for (const Point<D>& p : pts) {
    const auto key = canonical_coords(p);
    acc += hash_bytes(key.data(), sizeof(key), mix64(p.id));
  }
  return acc;
}

// Digest of per-query neighbor lists (canonical order inside a query,
// order-independent across queries).
template <int D>
std::uint64_t knn_checksum(std::span<const Point<D>> queries,
                           const KnnResult& result) {
  std::uint64_t acc = 0;
  for (std::size_t qi = 0; qi < result.size(); ++qi) {
    std::uint64_t h = mix64(queries[qi].id + 0x9e3779b9);
    for (const Neighbor& nb : result[qi]) {
      std::uint64_t dbits;
      static_assert(sizeof(dbits) == sizeof(nb.dist2));
      std::memcpy(&dbits, &nb.dist2, sizeof(dbits));
      h = mix64(h ^ mix64(nb.id) ^ dbits);
    }
    acc += h;
  }
  return acc;
}

}  // namespace bdl::bench
