#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace cubicspec {

// Thread budget for embarrassingly parallel loops (independent root brackets,
// matrix assembly).  CUBICSPEC_THREADS caps it; unset means hardware width.
inline int thread_budget() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("CUBICSPEC_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(std::min<long>(v, 256));
  }
  return static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n).  Work items must be independent; results are
// whatever fn writes to its own slots.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
  int workers = std::min(n, thread_budget());
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<int> next{0};
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace cubicspec
