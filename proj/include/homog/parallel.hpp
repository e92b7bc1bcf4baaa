#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace homog {

/// Worker count used by every Monte Carlo routine. 0 means hardware concurrency.
void set_worker_count(unsigned workers);
unsigned worker_count();

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

/// Splits [0, total) into `parts` contiguous ranges whose sizes differ by at most one.
inline IndexRange split_range(std::size_t total, std::size_t parts, std::size_t index) {
  const std::size_t base = total / parts;
  const std::size_t extra = total % parts;
  const std::size_t begin = index * base + std::min(index, extra);
  return {begin, begin + base + (index < extra ? 1 : 0)};
}

/// Evaluates fn(chunk) for chunk in [0, chunks) on the worker pool and returns
/// the results in chunk order. Work is keyed by chunk index only, so the output
/// does not depend on the number of workers or on scheduling.
template <class Result, class Fn>
std::vector<Result> map_chunks(std::size_t chunks, Fn&& fn) {
  std::vector<Result> out(chunks);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, worker_count()), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) out[c] = fn(c);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        out[c] = fn(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Number of chunks used to split a Monte Carlo run of `trials` items.
inline std::size_t default_chunks(std::size_t trials) {
  return std::clamp<std::size_t>(trials / 64, 1, 256);
}

}  // namespace homog
