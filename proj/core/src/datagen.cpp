#include "bdl/datagen.hpp"

#include <algorithm>

#include "bdl/hash.hpp"
#include "bdl/parallel.hpp"

namespace bdl {

std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t lane,
                           std::uint64_t i) {
  return mix64(seed ^ mix64(lane ^ mix64(i)));
}

double counter_unit(std::uint64_t seed, std::uint64_t lane, std::uint64_t i) {
  return static_cast<double>(counter_bits(seed, lane, i) >> 11) * 0x1.0p-53;
}

RawPoints gen_uniform(std::uint64_t n, std::uint32_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_uniform: n, d >= 1");
  const double side = std::sqrt(static_cast<double>(n));
  RawPoints out;
  out.dim = d;
  out.coords.resize(n * d);
  exec::parallel_for(0, n, [&](std::size_t i) {
    for (std::uint32_t c = 0; c < d; ++c) {
      out.coords[i * d + c] = counter_unit(seed, c, i) * side;
    }
  });
  return out;
}

RawPoints gen_visualvar(std::uint64_t n, std::uint32_t d, std::uint64_t seed,
                        VisualVarParams params) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_visualvar: n, d >= 1");
  if (params.jump_prob < 0 || params.jump_prob > 1) {
    throw std::invalid_argument("gen_visualvar: jump_prob in [0, 1]");
  }
  const double domain =
      params.domain >= 0 ? params.domain : std::sqrt(static_cast<double>(n));
  const double step = params.step >= 0 ? params.step : domain / 1000.0;

  // lanes: 0..d-1 jump targets, d..2d-1 steps, 2d jump decisions
  RawPoints out;
  out.dim = d;
  out.coords.resize(n * d);
  std::vector<double> pos(d);
  for (std::uint32_t c = 0; c < d; ++c) {
    pos[c] = counter_unit(seed, c, 0) * domain;
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    if (i > 0) {
      const bool jump = counter_unit(seed, 2 * d, i) < params.jump_prob;
      if (jump) {
        for (std::uint32_t c = 0; c < d; ++c) {
          pos[c] = counter_unit(seed, c, i) * domain;
        }
      } else {
        for (std::uint32_t c = 0; c < d; ++c) {
          const double delta = (counter_unit(seed, d + c, i) * 2 - 1) * step;
          pos[c] = std::clamp(pos[c] + delta, 0.0, domain);
        }
      }
    }
    for (std::uint32_t c = 0; c < d; ++c) out.coords[i * d + c] = pos[c];
  }
  return out;
}

}  // namespace bdl
