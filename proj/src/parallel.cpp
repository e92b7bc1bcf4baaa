#include "homog/parallel.hpp"

namespace homog {
namespace {
std::atomic<unsigned> g_workers{0};
}  // namespace

void set_worker_count(unsigned workers) { g_workers = workers; }

unsigned worker_count() {
  const unsigned w = g_workers.load();
  if (w != 0) return w;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace homog
