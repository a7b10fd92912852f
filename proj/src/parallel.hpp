#pragma once
// Chunked parallel loop over [0, n).  Chunks only ever touch disjoint output
// ranges, so results are bitwise independent of the thread schedule.  Nested
// calls run serially to avoid oversubscription.

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace morrey::detail {

inline void parallel_for_chunks(std::size_t n,
                                const std::function<void(std::size_t, std::size_t)>& body) {
  static thread_local bool inside = false;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (inside || hw == 1 || n < 64) {
    body(0, n);
    return;
  }
  inside = true;
  const std::size_t chunk = std::max<std::size_t>(1, n / (hw * 8));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    inside = true;
    for (;;) {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= n) break;
      body(begin, std::min(begin + chunk, n));
    }
    inside = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(hw - 1);
  for (unsigned t = 0; t + 1 < hw; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  inside = false;
}

}  // namespace morrey::detail
