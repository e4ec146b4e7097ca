#include "bench.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <variant>

#include "bdl/baselines.hpp"
#include "bdl/dims.hpp"

namespace bdl::bench {

std::string impl_name(Impl i) {
  switch (i) {
    case Impl::Bdl: return "bdl";
    case Impl::B1: return "b1";
    case Impl::B2: return "b2";
  }
  return "?";
}

Impl parse_impl(const std::string& s) {
  if (s == "bdl") return Impl::Bdl;
  if (s == "b1") return Impl::B1;
  if (s == "b2") return Impl::B2;
  throw std::invalid_argument("unknown implementation '" + s +
                              "' (expected bdl, b1 or b2)");
}

std::string heuristic_name(Heuristic h) {
  return h == Heuristic::ObjectMedian ? "object" : "spatial";
}

Heuristic parse_heuristic(const std::string& s) {
  if (s == "object") return Heuristic::ObjectMedian;
  if (s == "spatial") return Heuristic::SpatialMedian;
  throw std::invalid_argument("unknown split heuristic '" + s +
                              "' (expected object or spatial)");
}

std::string DatasetSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Uniform:
      os << "uniform:n=" << n << ":d=" << d << ":seed=" << seed;
      break;
    case Kind::VisualVar:
      os << "visualvar:n=" << n << ":d=" << d << ":seed=" << seed;
      break;
    case Kind::File:
      os << "file:" << path;
      break;
  }
  return os.str();
}

RawPoints load_dataset(const DatasetSpec& spec) {
  switch (spec.kind) {
    case DatasetSpec::Kind::Uniform:
      return gen_uniform(spec.n, spec.d, spec.seed);
    case DatasetSpec::Kind::VisualVar:
      return gen_visualvar(spec.n, spec.d, spec.seed, spec.vv);
    case DatasetSpec::Kind::File:
      return read_points(spec.path, spec.format);
  }
  throw std::logic_error("bad dataset kind");
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2;
}

void shuffle_indices(std::vector<std::uint64_t>& idx, std::uint64_t seed) {
  constexpr std::uint64_t kLane = 0x5f356495u;
  std::uint64_t ctr = 0;
  for (std::size_t i = idx.size(); i > 1; --i) {
    // unbiased bounded draw by rejection
    const std::uint64_t bound = i;
    const std::uint64_t zone = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
    std::uint64_t r;
    do {
      r = counter_bits(seed, kLane, ctr++);
    } while (r >= zone);
    std::swap(idx[i - 1], idx[r % bound]);
  }
}

// ---------------------------------------------------------------- CSV

const char* const kCsvHeader =
    "implementation,operation,dataset,heuristic,threads,batch_size,k,runs,"
    "warmup,median_seconds,run_seconds,checksum";

void emit_csv(std::span<const BenchResult> results, std::ostream& out) {
  out << kCsvHeader << '\n';
  out.precision(9);
  for (const BenchResult& r : results) {
    out << r.implementation << ',' << r.operation << ',' << r.dataset << ','
        << r.heuristic << ',' << r.threads << ',' << r.batch_size << ',' << r.k
        << ',' << r.runs << ',' << r.warmup << ',' << r.median_seconds << ',';
    for (std::size_t i = 0; i < r.run_seconds.size(); ++i) {
      if (i) out << ';';
      out << r.run_seconds[i];
    }
    out << ',' << r.checksum << '\n';
  }
}

void emit_csv(std::span<const BenchResult> results, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  emit_csv(results, out);
  if (!out) throw std::runtime_error(path + ": write failed");
}

std::vector<BenchResult> parse_csv(std::istream& in) {
  std::vector<BenchResult> out;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  if (line != kCsvHeader) throw std::runtime_error("csv: unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      const std::size_t next = line.find(',', pos);
      cols.push_back(line.substr(pos, next - pos));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (cols.size() != 12) throw std::runtime_error("csv: bad column count");
    BenchResult r;
    r.implementation = cols[0];
    r.operation = cols[1];
    r.dataset = cols[2];
    r.heuristic = cols[3];
    r.threads = std::stoi(cols[4]);
    r.batch_size = std::stoull(cols[5]);
    r.k = std::stoi(cols[6]);
    r.runs = std::stoi(cols[7]);
    r.warmup = std::stoi(cols[8]);
    r.median_seconds = std::stod(cols[9]);
    std::istringstream rs(cols[10]);
    std::string tok;
    while (std::getline(rs, tok, ';')) {
      if (!tok.empty()) r.run_seconds.push_back(std::stod(tok));
    }
    r.checksum = std::stoull(cols[11]);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------- runners

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <int D>
class AnyImpl {
 public:
  AnyImpl(Impl which, const BenchConfig& cfg) {
    switch (which) {
      case Impl::Bdl: {
        typename BdlTree<D>::Config c;
        c.buffer_cap = cfg.buffer_cap;
        c.heuristic = cfg.heuristic;
        c.leaf_cap = cfg.leaf_cap;
        c.use_bloom = cfg.use_bloom;
        v_.template emplace<BdlTree<D>>(c);
        break;
      }
      case Impl::B1:
        v_.template emplace<B1Tree<D>>(cfg.heuristic, cfg.leaf_cap);
        break;
      case Impl::B2:
        v_.template emplace<B2Tree<D>>(cfg.heuristic, cfg.leaf_cap);
        break;
    }
  }

  void insert(std::span<const Point<D>> batch) {
    std::visit([&](auto& t) { t.insert(batch); }, v_);
  }
  std::size_t erase(std::span<const Point<D>> batch) {
    return std::visit([&](auto& t) { return t.erase(batch); }, v_);
  }
  KnnResult knn(std::span<const Point<D>> queries, int k) const {
    return std::visit([&](const auto& t) { return t.knn(queries, k); }, v_);
  }
  std::size_t total_live() const {
    return std::visit([&](const auto& t) { return t.total_live(); }, v_);
  }
  std::vector<Point<D>> collect_live() const {
    return std::visit([&](const auto& t) { return t.collect_live(); }, v_);
  }
  const BdlTree<D>* as_bdl() const { return std::get_if<BdlTree<D>>(&v_); }

 private:
  std::variant<BdlTree<D>, B1Tree<D>, B2Tree<D>> v_;
};

// BdlTree::knn needs a non-member adapter because baselines expose knn too.
template <int D>
void check_bdl_invariants(const AnyImpl<D>& impl, std::size_t buffer_cap) {
  const BdlTree<D>* t = impl.as_bdl();
  if (!t) return;
  const auto st = t->stats();
  if (st.buffer_live >= buffer_cap) {
    throw std::logic_error("bdl invariant: buffer not below capacity");
  }
  std::size_t sum = st.buffer_live;
  for (std::size_t i = 0; i < st.slot_live.size(); ++i) {
    const bool occupied = (st.mask >> i) & 1;
    if (occupied != (st.slot_live[i] > 0)) {
      throw std::logic_error("bdl invariant: mask/occupancy mismatch");
    }
    const std::size_t nominal = (std::size_t{1} << i) * buffer_cap;
    if (occupied && (st.slot_live[i] < (nominal + 1) / 2 ||
                     st.slot_live[i] > nominal)) {
      throw std::logic_error("bdl invariant: slot outside [half, nominal]");
    }
    sum += st.slot_live[i];
  }
  if (sum != st.total_live) {
    throw std::logic_error("bdl invariant: live counts disagree");
  }
}

// Quadratic reference used by --validate on small inputs.
template <int D>
KnnResult reference_knn(std::span<const Point<D>> pts,
                        std::span<const Point<D>> queries, int k) {
  KnnResult out(queries.size());
  exec::parallel_for(0, queries.size(), [&](std::size_t qi) {
    std::vector<Neighbor> all;
    all.reserve(pts.size());
    for (const Point<D>& p : pts) {
      all.push_back({p.id, squared_distance(p, queries[qi])});
    }
    std::sort(all.begin(), all.end(), neighbor_less);
    if (all.size() > static_cast<std::size_t>(k)) all.resize(k);
    out[qi] = std::move(all);
  });
  return out;
}

template <int D>
void validate_knn_exact(const AnyImpl<D>& impl,
                        std::span<const Point<D>> queries, int k) {
  auto live = impl.collect_live();
  const KnnResult want = reference_knn<D>(live, queries, k);
  const KnnResult got = impl.knn(queries, k);
  if (want != got) {
    throw std::logic_error("validation failed: k-NN differs from oracle");
  }
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(
    std::size_t n, std::size_t nbatches) {
  std::vector<std::pair<std::size_t, std::size_t>> out(nbatches);
  for (std::size_t i = 0; i < nbatches; ++i) {
    out[i] = {n * i / nbatches, n * (i + 1) / nbatches};
  }
  return out;
}

std::size_t batches_for(const BenchConfig& cfg, double pct, std::size_t n,
                        std::uint64_t batch_size) {
  if (batch_size > 0) {
    return (n + batch_size - 1) / batch_size;
  }
  (void)cfg;
  (void)n;
  return static_cast<std::size_t>(std::ceil(1.0 / pct));
}

BenchResult result_skeleton(const BenchConfig& cfg, const std::string& op) {
  BenchResult r;
  r.implementation = impl_name(cfg.impl);
  r.operation = op;
  r.dataset = cfg.dataset.describe();
  r.heuristic = heuristic_name(cfg.heuristic);
  r.threads = cfg.threads > 0 ? cfg.threads : exec::max_threads();
  r.runs = cfg.runs;
  r.warmup = cfg.warmup;
  return r;
}

bool validation_applies(const BenchConfig& cfg, std::size_t n) {
  return cfg.validate && n <= cfg.validate_cap;
}

template <int D>
BenchResult run_build_d(const BenchConfig& cfg, const RawPoints& raw) {
  exec::ThreadLimit limit(cfg.threads > 0 ? cfg.threads : exec::max_threads());
  const auto pts = to_points<D>(raw);
  BenchResult r = result_skeleton(cfg, "build");
  r.batch_size = pts.size();
  for (int run = 0; run < cfg.warmup + cfg.runs; ++run) {
    AnyImpl<D> impl(cfg.impl, cfg);
    const auto t0 = Clock::now();
    impl.insert(pts);
    const double dt = seconds_since(t0);
    if (run >= cfg.warmup) r.run_seconds.push_back(dt);
    if (impl.total_live() != pts.size()) {
      throw std::logic_error("build: live count != n");
    }
    check_bdl_invariants(impl, cfg.buffer_cap);
    if (run + 1 == cfg.warmup + cfg.runs) {
      auto live = impl.collect_live();
      r.checksum = state_checksum<D>(live);
      if (validation_applies(cfg, pts.size())) {
        const std::size_t nq = std::min<std::size_t>(200, pts.size());
        validate_knn_exact<D>(impl, std::span(pts).subspan(0, nq), 5);
      }
    }
  }
  r.median_seconds = median_of(r.run_seconds);
  return r;
}

template <int D>
std::vector<BenchResult> run_insert_d(const BenchConfig& cfg,
                                      const RawPoints& raw) {
  exec::ThreadLimit limit(cfg.threads > 0 ? cfg.threads : exec::max_threads());
  const auto pts = to_points<D>(raw);
  std::vector<BenchResult> out;

  std::vector<std::size_t> batch_counts;
  if (!cfg.batch_sizes.empty()) {
    for (std::uint64_t bs : cfg.batch_sizes) {
      batch_counts.push_back(batches_for(cfg, 0, pts.size(), bs));
    }
  } else {
    for (double pct : cfg.batch_pcts) {
      batch_counts.push_back(batches_for(cfg, pct, pts.size(), 0));
    }
  }

  for (std::size_t nbatches : batch_counts) {
    const auto ranges = batch_ranges(pts.size(), nbatches);
    BenchResult r = result_skeleton(cfg, "insert");
    r.batch_size = ranges.empty() ? 0 : ranges[0].second - ranges[0].first;
    for (int run = 0; run < cfg.warmup + cfg.runs; ++run) {
      AnyImpl<D> impl(cfg.impl, cfg);
      const auto t0 = Clock::now();
      for (const auto& [lo, hi] : ranges) {
        impl.insert(std::span(pts).subspan(lo, hi - lo));
      }
      const double dt = seconds_since(t0);
      if (run >= cfg.warmup) r.run_seconds.push_back(dt);
      if (impl.total_live() != pts.size()) {
        throw std::logic_error("insert: live count != n");
      }
      check_bdl_invariants(impl, cfg.buffer_cap);
      if (run + 1 == cfg.warmup + cfg.runs) {
        auto live = impl.collect_live();
        r.checksum = state_checksum<D>(live);
        if (validation_applies(cfg, pts.size())) {
          // cross-path check: batched build answers == single-shot answers
          const std::size_t nq = std::min<std::size_t>(200, pts.size());
          const auto queries = std::span(pts).subspan(0, nq);
          AnyImpl<D> oneshot(cfg.impl, cfg);
          oneshot.insert(pts);
          if (impl.knn(queries, 5) != oneshot.knn(queries, 5)) {
            throw std::logic_error(
                "insert: batched and single-shot k-NN differ");
          }
          validate_knn_exact<D>(impl, queries, 5);
        }
      }
    }
    r.median_seconds = median_of(r.run_seconds);
    out.push_back(std::move(r));
  }
  return out;
}

template <int D>
std::vector<BenchResult> run_delete_d(const BenchConfig& cfg,
                                      const RawPoints& raw) {
  exec::ThreadLimit limit(cfg.threads > 0 ? cfg.threads : exec::max_threads());
  const auto pts = to_points<D>(raw);
  std::vector<BenchResult> out;

  std::vector<std::size_t> batch_counts;
  if (!cfg.batch_sizes.empty()) {
    for (std::uint64_t bs : cfg.batch_sizes) {
      batch_counts.push_back(batches_for(cfg, 0, pts.size(), bs));
    }
  } else {
    for (double pct : cfg.batch_pcts) {
      batch_counts.push_back(batches_for(cfg, pct, pts.size(), 0));
    }
  }

  for (std::size_t nbatches : batch_counts) {
    const auto ranges = batch_ranges(pts.size(), nbatches);
    BenchResult r = result_skeleton(cfg, "delete");
    r.batch_size = ranges.empty() ? 0 : ranges[0].second - ranges[0].first;
    for (int run = 0; run < cfg.warmup + cfg.runs; ++run) {
      AnyImpl<D> impl(cfg.impl, cfg);
      impl.insert(pts);  // setup, untimed
      const auto t0 = Clock::now();
      for (const auto& [lo, hi] : ranges) {
        impl.erase(std::span(pts).subspan(lo, hi - lo));
      }
      const double dt = seconds_since(t0);
      if (run >= cfg.warmup) r.run_seconds.push_back(dt);
      if (impl.total_live() != 0) {
        throw std::logic_error("delete: tree not empty at the end");
      }
      check_bdl_invariants(impl, cfg.buffer_cap);
    }
    // partial-deletion correctness probe, untimed
    if (validation_applies(cfg, pts.size()) && !ranges.empty()) {
      AnyImpl<D> impl(cfg.impl, cfg);
      impl.insert(pts);
      const std::size_t half = ranges.size() / 2;
      for (std::size_t i = 0; i < half; ++i) {
        impl.erase(
            std::span(pts).subspan(ranges[i].first,
                                   ranges[i].second - ranges[i].first));
      }
      const std::size_t nq = std::min<std::size_t>(200, pts.size());
      validate_knn_exact<D>(impl, std::span(pts).subspan(0, nq), 5);
      auto live = impl.collect_live();
      r.checksum = state_checksum<D>(live);
    }
    r.median_seconds = median_of(r.run_seconds);
    out.push_back(std::move(r));
  }
  return out;
}

template <int D>
std::vector<BenchResult> run_knn_d(const BenchConfig& cfg,
                                   const RawPoints& raw) {
  exec::ThreadLimit limit(cfg.threads > 0 ? cfg.threads : exec::max_threads());
  const auto pts = to_points<D>(raw);
  AnyImpl<D> impl(cfg.impl, cfg);
  impl.insert(pts);

  const std::size_t nq = std::max<std::size_t>(
      1, static_cast<std::size_t>(cfg.query_pct * pts.size()));
  const auto queries = std::span(pts).subspan(0, std::min(nq, pts.size()));

  std::vector<BenchResult> out;
  for (int k : cfg.ks) {
    if (validation_applies(cfg, pts.size())) {
      const std::size_t vq = std::min<std::size_t>(200, queries.size());
      validate_knn_exact<D>(impl, queries.subspan(0, vq), k);
    }
    BenchResult r = result_skeleton(cfg, "knn");
    r.k = k;
    r.batch_size = queries.size();
    KnnResult last;
    for (int run = 0; run < cfg.warmup + cfg.runs; ++run) {
      const auto t0 = Clock::now();
      KnnResult res = impl.knn(queries, k);
      const double dt = seconds_since(t0);
      if (run >= cfg.warmup) r.run_seconds.push_back(dt);
      last = std::move(res);
    }
    r.checksum = knn_checksum<D>(queries, last);
    r.median_seconds = median_of(r.run_seconds);
    out.push_back(std::move(r));
  }
  return out;
}

constexpr int kMixedInsertBatches = 20;
constexpr int kMixedDeleteBatches = 15;
constexpr int kMixedBatchesPerSection = 5;
constexpr int kMixedK = 5;

template <int D>
std::vector<BenchResult> run_mixed_d(const BenchConfig& cfg,
                                     const RawPoints& raw) {
  exec::ThreadLimit limit(cfg.threads > 0 ? cfg.threads : exec::max_threads());
  const auto pts = to_points<D>(raw);
  const std::size_t n = pts.size();

  const auto ins_ranges = batch_ranges(n, kMixedInsertBatches);
  // deletes: disjoint random 5% slices
  std::vector<std::uint64_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle_indices(order, cfg.seed);
  std::vector<std::vector<Point<D>>> del_batches(kMixedDeleteBatches);
  const auto del_ranges = batch_ranges(n, kMixedInsertBatches);
  for (int j = 0; j < kMixedDeleteBatches; ++j) {
    for (std::size_t i = del_ranges[j].first; i < del_ranges[j].second; ++i) {
      del_batches[j].push_back(pts[order[i]]);
    }
  }

  static const char* kSections[] = {"INS0", "INS1", "INS2", "INS3",
                                    "DEL0", "DEL1", "DEL2"};
  constexpr int kNumSections = 7;
  std::vector<std::vector<double>> update_times(kNumSections);
  std::vector<std::vector<double>> knn_times(kNumSections);
  std::vector<std::uint64_t> knn_checksums(kNumSections, 0);

  for (int run = 0; run < cfg.warmup + cfg.runs; ++run) {
    AnyImpl<D> impl(cfg.impl, cfg);
    const bool record = run >= cfg.warmup;
    int section = 0;
    auto do_section = [&](auto&& update_op) {
      const auto t0 = Clock::now();
      update_op();
      const double upd = seconds_since(t0);
      const auto t1 = Clock::now();
      KnnResult res = impl.knn(pts, kMixedK);
      const double knn = seconds_since(t1);
      if (record) {
        update_times[section].push_back(upd);
        knn_times[section].push_back(knn);
        knn_checksums[section] = knn_checksum<D>(std::span(pts), res);
        if (validation_applies(cfg, n)) {
          const std::size_t vq = std::min<std::size_t>(100, n);
          validate_knn_exact<D>(impl, std::span(pts).subspan(0, vq), kMixedK);
        }
      }
      ++section;
    };
    for (int s = 0; s < 4; ++s) {
      do_section([&] {
        for (int b = 0; b < kMixedBatchesPerSection; ++b) {
          const auto [lo, hi] = ins_ranges[s * kMixedBatchesPerSection + b];
          impl.insert(std::span(pts).subspan(lo, hi - lo));
        }
      });
      if (s == 3 && impl.total_live() != n) {
        throw std::logic_error("mixed: live != n after INS3");
      }
    }
    for (int s = 0; s < 3; ++s) {
      do_section([&] {
        for (int b = 0; b < kMixedBatchesPerSection; ++b) {
          impl.erase(del_batches[s * kMixedBatchesPerSection + b]);
        }
      });
    }
    const std::size_t expect_live = n - (del_ranges[kMixedDeleteBatches - 1].second);
    if (impl.total_live() != expect_live) {
      throw std::logic_error("mixed: live count wrong after DEL2");
    }
    check_bdl_invariants(impl, cfg.buffer_cap);
  }

  std::vector<BenchResult> out;
  for (int s = 0; s < kNumSections; ++s) {
    BenchResult ru = result_skeleton(cfg, std::string(kSections[s]) + "-update");
    ru.batch_size = ins_ranges[0].second - ins_ranges[0].first;
    ru.run_seconds = update_times[s];
    ru.median_seconds = median_of(ru.run_seconds);
    ru.checksum = 0;
    out.push_back(std::move(ru));

    BenchResult rk = result_skeleton(cfg, std::string(kSections[s]) + "-knn");
    rk.k = kMixedK;
    rk.batch_size = n;
    rk.run_seconds = knn_times[s];
    rk.median_seconds = median_of(rk.run_seconds);
    rk.checksum = knn_checksums[s];
    out.push_back(std::move(rk));
  }
  return out;
}

}  // namespace

BenchResult run_build(const BenchConfig& cfg) {
  const RawPoints raw = load_dataset(cfg.dataset);
  return dispatch_dim(static_cast<int>(raw.dim), [&]<int D>() {
    return run_build_d<D>(cfg, raw);
  });
}

std::vector<BenchResult> run_insert(const BenchConfig& cfg) {
  const RawPoints raw = load_dataset(cfg.dataset);
  return dispatch_dim(static_cast<int>(raw.dim), [&]<int D>() {
    return run_insert_d<D>(cfg, raw);
  });
}

std::vector<BenchResult> run_delete(const BenchConfig& cfg) {
  const RawPoints raw = load_dataset(cfg.dataset);
  return dispatch_dim(static_cast<int>(raw.dim), [&]<int D>() {
    return run_delete_d<D>(cfg, raw);
  });
}

std::vector<BenchResult> run_knn(const BenchConfig& cfg) {
  const RawPoints raw = load_dataset(cfg.dataset);
  return dispatch_dim(static_cast<int>(raw.dim), [&]<int D>() {
    return run_knn_d<D>(cfg, raw);
  });
}

std::vector<BenchResult> run_mixed(const BenchConfig& cfg) {
  const RawPoints raw = load_dataset(cfg.dataset);
  return dispatch_dim(static_cast<int>(raw.dim), [&]<int D>() {
    return run_mixed_d<D>(cfg, raw);
  });
}

}  // namespace bdl::bench
