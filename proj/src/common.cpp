#include "flm/common.hpp"

#include <algorithm>
#include <cstdlib>

namespace flm {

unsigned thread_count() {
  if (const char* env = std::getenv("FLMICRO_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  unsigned nt = std::min<std::size_t>(thread_count(), n == 0 ? 1 : n);
  if (nt <= 1 || n < 1024) {
    body(0, n);
    return;
  }
  std::vector<std::thread> threads;
  std::size_t chunk = (n + nt - 1) / nt;
  for (unsigned t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : threads) th.join();
}

}  // namespace flm
