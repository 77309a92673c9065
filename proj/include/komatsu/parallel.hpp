#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace komatsu {

// Worker count: KOMATSU_THREADS if set (clamped to [1, 64]), else hardware.
inline int thread_count() {
  if (const char* env = std::getenv("KOMATSU_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v > 64 ? 64 : v);
    return 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw > 16 ? 16 : hw);
}

// Runs fn(begin, end) over a partition of [0, n). Serial when n is small
// or one worker suffices.
inline void parallel_for(long n, const std::function<void(long, long)>& fn) {
  const int workers = thread_count();
  if (workers <= 1 || n < 256) {
    if (n > 0) fn(0, n);
    return;
  }
  const long chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    const long b = t * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back(fn, b, e);
  }
  for (auto& th : pool) th.join();
}

}  // namespace komatsu
