#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <oneapi/tbb/parallel_sort.h>

#include "bdl/parallel.hpp"

namespace bdl::parprim {

using exec::kSerialCutoff;

// Exclusive scan: returns [id, a0, a0+a1, ...] plus the overall sum.
// op must be associative with the given identity. The blocked two-pass
// scheme makes the result independent of the thread schedule.
template <typename T, typename Op>
std::pair<std::vector<T>, T> prefix_sum(std::span<const T> values, Op op,
                                        T identity) {
  const std::size_t n = values.size();
  std::vector<T> out(n);
  if (n < kSerialCutoff) {
    T acc = identity;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = acc;
      acc = op(acc, values[i]);
    }
    return {std::move(out), acc};
  }

  constexpr std::size_t kBlock = 2048;
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<T> block_sum(nblocks, identity);
  exec::parallel_for(0, nblocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    T acc = identity;
    for (std::size_t i = lo; i < hi; ++i) acc = op(acc, values[i]);
    block_sum[b] = acc;
  });
  T total = identity;
  for (std::size_t b = 0; b < nblocks; ++b) {
    T s = block_sum[b];
    block_sum[b] = total;
    total = op(total, s);
  }
  exec::parallel_for(0, nblocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    T acc = block_sum[b];
    for (std::size_t i = lo; i < hi; ++i) {
      out[i] = acc;
      acc = op(acc, values[i]);
    }
  });
  return {std::move(out), total};
}

template <typename R, typename T, typename Proj, typename Op>
R transform_reduce(std::span<const T> values, Proj proj, Op op, R identity) {
  const std::size_t n = values.size();
  if (n < kSerialCutoff) {
    R acc = identity;
    for (const T& v : values) acc = op(acc, proj(v));
    return acc;
  }
  constexpr std::size_t kBlock = 4096;
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<R> block_sum(nblocks, identity);
  exec::parallel_for(0, nblocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    R acc = identity;
    for (std::size_t i = lo; i < hi; ++i) acc = op(acc, proj(values[i]));
    block_sum[b] = acc;
  });
  R total = identity;
  for (const R& v : block_sum) total = op(total, v);
  return total;
}

template <typename T>
T reduce(std::span<const T> values, auto op, T identity) {
  const std::size_t n = values.size();
  if (n < kSerialCutoff) {
    T acc = identity;
    for (const T& v : values) acc = op(acc, v);
    return acc;
  }
  constexpr std::size_t kBlock = 4096;
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<T> block_sum(nblocks, identity);
  exec::parallel_for(0, nblocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    T acc = identity;
    for (std::size_t i = lo; i < hi; ++i) acc = op(acc, values[i]);
    block_sum[b] = acc;
  });
  T total = identity;
  for (const T& v : block_sum) total = op(total, v);
  return total;
}

namespace detail {

// Stable blocked scatter shared by the two- and three-way partitions.
// classify(x) returns the group index of x (0..G-1); groups appear in order.
template <int G, typename T, typename Classify>
std::array<std::size_t, G> scatter_partition(std::span<T> items,
                                             Classify classify) {
  const std::size_t n = items.size();
  std::array<std::size_t, G> counts{};
  if (n < kSerialCutoff) {
    std::vector<T> scratch(items.begin(), items.end());
    for (const T& v : scratch) ++counts[classify(v)];
    std::array<std::size_t, G> cursor{};
    std::size_t base = 0;
    for (int g = 0; g < G; ++g) {
      cursor[g] = base;
      base += counts[g];
    }
    for (const T& v : scratch) items[cursor[classify(v)]++] = v;
    return counts;
  }

  constexpr std::size_t kBlock = 2048;
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<std::array<std::size_t, G>> per_block(nblocks);
  exec::parallel_for(0, nblocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    std::array<std::size_t, G> c{};
    for (std::size_t i = lo; i < hi; ++i) ++c[classify(items[i])];
    per_block[b] = c;
  });
  // exclusive offsets per group, blocks in order (keeps the scatter stable)
  std::array<std::size_t, G> running{};
  for (std::size_t b = 0; b < nblocks; ++b) {
    for (int g = 0; g < G; ++g) {
      std::size_t c = per_block[b][g];
      per_block[b][g] = running[g];
      running[g] += c;
    }
  }
  counts = running;
  std::array<std::size_t, G> group_base{};
  std::size_t base = 0;
  for (int g = 0; g < G; ++g) {
    group_base[g] = base;
    base += counts[g];
  }
  std::vector<T> scratch(items.begin(), items.end());
  exec::parallel_for(0, nblocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    std::array<std::size_t, G> cursor;
    for (int g = 0; g < G; ++g) cursor[g] = group_base[g] + per_block[b][g];
    for (std::size_t i = lo; i < hi; ++i) {
      items[cursor[classify(scratch[i])]++] = scratch[i];
    }
  });
  return counts;
}

}  // namespace detail

// Reorders items so that everything satisfying pred precedes the rest.
// Stable; returns the number of satisfying items.
template <typename T, typename Pred>
std::size_t partition(std::span<T> items, Pred pred) {
  auto counts = detail::scatter_partition<2>(
      items, [&](const T& v) { return pred(v) ? 0 : 1; });
  return counts[0];
}

// Three-way split around a key value: [key < v | key == v | key > v].
// Returns (count of <, count of ==).
template <typename T, typename KeyFn>
std::pair<std::size_t, std::size_t> partition_three_way(std::span<T> items,
                                                        KeyFn key, double v) {
  auto counts = detail::scatter_partition<3>(items, [&](const T& t) {
    const double k = key(t);
    return k < v ? 0 : (k == v ? 1 : 2);
  });
  return {counts[0], counts[1]};
}

// Reorders items so that the first ceil(n/2) have keys <= every key in the
// remainder; returns ceil(n/2). Elements with keys equal to the median may
// land on either side. Large inputs go through a parallel in-place sort.
template <typename T, typename KeyFn>
std::size_t median_partition(std::span<T> items, KeyFn key) {
  const std::size_t n = items.size();
  const std::size_t m = (n + 1) / 2;
  if (n <= 1) return m;
  auto cmp = [&](const T& a, const T& b) { return key(a) < key(b); };
  if (n < kSerialCutoff) {
    std::nth_element(items.begin(), items.begin() + (m - 1), items.end(), cmp);
  } else {
    oneapi::tbb::parallel_sort(items.begin(), items.end(), cmp);
  }
  return m;
}

template <typename T, typename Cmp>
void sort(std::span<T> items, Cmp cmp) {
  if (items.size() < kSerialCutoff) {
    std::sort(items.begin(), items.end(), cmp);
  } else {
    oneapi::tbb::parallel_sort(items.begin(), items.end(), cmp);
  }
}

}  // namespace bdl::parprim
