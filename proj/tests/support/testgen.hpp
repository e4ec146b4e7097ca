#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bdl/geometry.hpp"

namespace testgen {

template <int D>
std::vector<bdl::Point<D>> uniform_points(std::size_t n, std::uint32_t seed,
                                          double side = 100.0,
                                          std::uint32_t id_base = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, side);
  std::vector<bdl::Point<D>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < D; ++c) out[i].x[c] = dist(rng);
    out[i].id = id_base + static_cast<std::uint32_t>(i);
  }
  return out;
}

// Points snapped to a small integer grid: plenty of duplicate coordinates
// and split-value ties.
template <int D>
std::vector<bdl::Point<D>> gridded_points(std::size_t n, std::uint32_t seed,
                                          int grid = 8,
                                          std::uint32_t id_base = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, grid - 1);
  std::vector<bdl::Point<D>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < D; ++c) out[i].x[c] = dist(rng);
    out[i].id = id_base + static_cast<std::uint32_t>(i);
  }
  return out;
}

}  // namespace testgen
