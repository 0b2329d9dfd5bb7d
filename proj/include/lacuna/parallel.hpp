#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace lacuna {

/// Worker count: hardware concurrency, capped by LACUNA_THREADS when set.
inline unsigned thread_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LACUNA_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (...) {
    }
  }
  return n;
}

/// Runs body(i) for i in [0, count). Work items must be independent; the
/// first exception thrown by any item is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Sums `count` equally sized real vectors produced by produce(i, out).
/// Items are grouped into fixed blocks and block sums are combined by a
/// pairwise tree, so the result is bit-identical for any thread count.
template <typename Produce>
std::vector<double> tree_sum(std::size_t count, std::size_t length, Produce&& produce) {
  constexpr std::size_t kBlock = 8;
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    std::vector<double> acc(length, 0.0);
    std::vector<double> item(length);
    for (std::size_t i = b * kBlock; i < std::min(count, (b + 1) * kBlock); ++i) {
      std::fill(item.begin(), item.end(), 0.0);
      produce(i, item);
      for (std::size_t j = 0; j < length; ++j) acc[j] += item[j];
    }
    partial[b] = std::move(acc);
  });
  if (partial.empty()) return std::vector<double>(length, 0.0);
  for (std::size_t stride = 1; stride < partial.size(); stride *= 2) {
    for (std::size_t i = 0; i + stride < partial.size(); i += 2 * stride) {
      auto& lhs = partial[i];
      const auto& rhs = partial[i + stride];
      for (std::size_t j = 0; j < length; ++j) lhs[j] += rhs[j];
    }
  }
  return std::move(partial.front());
}

}  // namespace lacuna
