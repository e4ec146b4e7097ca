#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bdl {

// Compile-time dimensions the tooling instantiates. Covers the benchmark
// protocols (2/3/5/7-d synthetic data) and the 10-d and 16-d real datasets.
#define BDL_SUPPORTED_DIMS(X) \
  X(1) X(2) X(3) X(4) X(5) X(6) X(7) X(8) X(10) X(16)

template <typename F>
decltype(auto) dispatch_dim(int d, F&& f) {
  switch (d) {
#define BDL_DISPATCH_CASE(N) \
  case N:                    \
    return std::forward<F>(f).template operator()<N>();
    BDL_SUPPORTED_DIMS(BDL_DISPATCH_CASE)
#undef BDL_DISPATCH_CASE
    default:
      throw std::invalid_argument(
          "unsupported dimension " + std::to_string(d) +
          " (supported: 1-8, 10, 16)");
  }
}

}  // namespace bdl
