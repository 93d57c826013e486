#ifndef TAGAD_CONCURRENCY_HPP
#define TAGAD_CONCURRENCY_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tagad {

// Runs fn(i) for i in [0, n) on at most `limit` threads. The first exception
// thrown by any task stops further scheduling and is rethrown to the caller.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t limit, Fn&& fn) {
  if (n == 0) return;
  limit = std::clamp<std::size_t>(limit, 1, n);
  if (limit == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> workers;
    workers.reserve(limit);
    for (std::size_t w = 0; w < limit; ++w) {
      workers.emplace_back([&] {
        while (!stop.load()) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
            stop.store(true);
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tagad

#endif  // TAGAD_CONCURRENCY_HPP
