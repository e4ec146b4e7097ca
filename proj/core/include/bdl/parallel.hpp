#pragma once

#include <cstddef>

#include <oneapi/tbb/blocked_range.h>
#include <oneapi/tbb/global_control.h>
#include <oneapi/tbb/info.h>
#include <oneapi/tbb/parallel_for.h>
#include <oneapi/tbb/parallel_invoke.h>

namespace bdl::exec {

// Below this many elements every primitive and recursive case runs serially.
inline constexpr std::size_t kSerialCutoff = 1000;

inline int max_threads() { return oneapi::tbb::info::default_concurrency(); }

// Caps the fork-join pool for the lifetime of the object.
class ThreadLimit {
 public:
  explicit ThreadLimit(int n)
      : ctl_(oneapi::tbb::global_control::max_allowed_parallelism,
             n < 1 ? 1 : static_cast<std::size_t>(n)) {}

 private:
  oneapi::tbb::global_control ctl_;
};

template <typename Body>
void parallel_for(std::size_t lo, std::size_t hi, Body&& body,
                  std::size_t grain = 1024) {
  if (hi <= lo) return;
  if (hi - lo < kSerialCutoff) {
    for (std::size_t i = lo; i < hi; ++i) body(i);
    return;
  }
  oneapi::tbb::parallel_for(
      oneapi::tbb::blocked_range<std::size_t>(lo, hi, grain),
      [&](const oneapi::tbb::blocked_range<std::size_t>& r) {
        for (std::size_t i = r.begin(); i != r.end(); ++i) body(i);
      });
}

// Blocked variant: body receives [lo, hi) chunks.
template <typename Body>
void parallel_for_blocked(std::size_t lo, std::size_t hi, Body&& body,
                          std::size_t grain = 2048) {
  if (hi <= lo) return;
  if (hi - lo < kSerialCutoff) {
    body(lo, hi);
    return;
  }
  oneapi::tbb::parallel_for(
      oneapi::tbb::blocked_range<std::size_t>(lo, hi, grain),
      [&](const oneapi::tbb::blocked_range<std::size_t>& r) {
        body(r.begin(), r.end());
      });
}

// Fork-join pair; runs serially when `parallel` is false.
template <typename A, typename B>
void invoke(bool parallel, A&& a, B&& b) {
  if (parallel) {
    oneapi::tbb::parallel_invoke(a, b);
  } else {
    a();
    b();
  }
}

}  // namespace bdl::exec
