#include "fsel/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace fsel {

namespace {
std::atomic<int> g_max_threads{0};

int resolve_auto() {
  if (const char* env = std::getenv("FSEL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace

int max_threads() {
  const int n = g_max_threads.load(std::memory_order_relaxed);
  return n >= 1 ? n : resolve_auto();
}

void set_max_threads(int n) {
  g_max_threads.store(n < 0 ? 0 : n, std::memory_order_relaxed);
}

}  // namespace fsel
