#include "vidpace/util.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace vidpace {

void parallel_for(int64_t n, int workers, const std::function<void(int64_t)>& fn) {
  if (n <= 0) return;
  const int64_t nthreads = std::clamp<int64_t>(workers, 1, n);
  if (nthreads == 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(nthreads));
  const int64_t chunk = (n + nthreads - 1) / nthreads;
  for (int64_t t = 0; t < nthreads; ++t) {
    const int64_t begin = t * chunk;
    const int64_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (int64_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

uint32_t fnv1a32(std::string_view s) {
  uint32_t h = 0x811C9DC5u;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x01000193u;
  }
  return h;
}

}  // namespace vidpace
