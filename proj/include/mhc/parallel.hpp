#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mhc {

/// Environment variable selecting the worker count. Unset means sequential.
inline constexpr const char* kWorkersEnv = "MHC_WORKERS";

inline unsigned workers_from_env() {
  const char* raw = std::getenv(kWorkersEnv);
  if (raw == nullptr || *raw == '\0') return 1;
  try {
    const long v = std::stol(raw);
    return v < 1 ? 1u : static_cast<unsigned>(v);
  } catch (...) {
    return 1;
  }
}

/// Runs `fn(i)` for i in [0, n). Each index must write only to its own slot;
/// callers reduce the slots in index order so results do not depend on the
/// number of workers.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = workers_from_env()) {
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
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

}  // namespace mhc
