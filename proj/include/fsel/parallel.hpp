#pragma once

#include <algorithm>
#include <thread>
#include <vector>

#include "fsel/core.hpp"

namespace fsel {

// Effective thread cap: set_max_threads() if called with n >= 1, otherwise the
// FSEL_THREADS environment variable, otherwise hardware concurrency.
int max_threads();
void set_max_threads(int n);  // n == 0 restores automatic resolution

// Runs fn(i) for i in [begin, end), split into contiguous per-thread chunks.
// Iterations must be independent and must not throw; results never depend on
// the thread count.
template <class Fn>
void parallel_for(Index begin, Index end, Fn&& fn) {
  const Index count = end - begin;
  if (count <= 0) return;
  constexpr Index kGrain = 2048;
  int threads = max_threads();
  if (threads > 1 && count / threads < kGrain)
    threads = std::max<Index>(1, count / kGrain);
  if (threads <= 1) {
    for (Index i = begin; i < end; ++i) fn(i);
    return;
  }
  const Index chunk = (count + threads - 1) / threads;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    const Index lo = begin + chunk * t;
    const Index hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (Index i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace fsel
