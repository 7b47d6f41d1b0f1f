#pragma once
// Index-sharded parallel loop. Callers must write only to their own slot so
// results are independent of scheduling; with ABIL_THREADS=1 the loop runs
// inline, which is also the fallback on any thread-spawn failure.

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace abil {

inline unsigned worker_count() {
  if (const char* env = std::getenv("ABIL_THREADS")) {
    long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned workers = worker_count();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (workers > n) workers = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace abil
