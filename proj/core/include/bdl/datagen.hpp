#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdl/geometry.hpp"

namespace bdl {

// Dimension-erased point rows; ids are implicit row indices.
struct RawPoints {
  std::uint32_t dim = 0;
  std::vector<double> coords;  // row-major, n * dim values

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  double at(std::size_t row, std::uint32_t c) const {
    return coords[row * dim + c];
  }
};

// Counter-based uniform draw: value i of the stream named (seed, lane) is a
// pure function of its inputs, so parallel generation over index ranges
// reproduces serial output exactly.
std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t lane,
                           std::uint64_t i);
double counter_unit(std::uint64_t seed, std::uint64_t lane, std::uint64_t i);

// n i.i.d. points uniform in [0, sqrt(n)]^d.
RawPoints gen_uniform(std::uint64_t n, std::uint32_t d, std::uint64_t seed);

struct VisualVarParams {
  double step = -1;      // < 0: defaults to domain / 1000
  double jump_prob = 0.01;
  double domain = -1;    // side length; < 0: defaults to sqrt(n)
};

// Clustered variable-density walk: with probability jump_prob the walker
// teleports uniformly inside the domain cube, otherwise it takes a uniform
// step in [-step, step]^d clamped to the domain.
RawPoints gen_visualvar(std::uint64_t n, std::uint32_t d, std::uint64_t seed,
                        VisualVarParams params = {});

template <int D>
std::vector<Point<D>> to_points(const RawPoints& raw) {
  if (raw.dim != static_cast<std::uint32_t>(D)) {
    throw std::invalid_argument("to_points: dimension mismatch");
  }
  const std::size_t n = raw.size();
  std::vector<Point<D>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < D; ++c) out[i].x[c] = raw.at(i, c);
    out[i].id = static_cast<std::uint32_t>(i);
  }
  return out;
}

}  // namespace bdl
