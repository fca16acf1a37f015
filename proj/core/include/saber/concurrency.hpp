// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace saber {

// Counting semaphore with a runtime bound. Used to cap in-flight client
// requests; a mutex/condvar implementation keeps the bound exact.
class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count) {}

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return count_ > 0; });
    --count_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int count_;
};

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(Semaphore& s) : sem_(s) { sem_.acquire(); }
  ~SemaphoreGuard() { sem_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  Semaphore& sem_;
};

// Applies fn to items [0, n) on up to `jobs` worker threads. Results land in
// input order regardless of completion order, so downstream output is
// deterministic. Exceptions are captured per item and returned to the caller.
template <typename Result>
struct ParallelOutcome {
  std::vector<Result> results;                 // default-constructed on failure
  std::vector<std::exception_ptr> errors;      // null on success, size n
};

template <typename Result, typename Fn>
ParallelOutcome<Result> parallel_map(std::size_t n, int jobs, Fn&& fn) {
  ParallelOutcome<Result> out;
  out.results.resize(n);
  out.errors.resize(n);
  if (n == 0) return out;
  if (jobs < 1) jobs = 1;
  if (static_cast<std::size_t>(jobs) > n) jobs = static_cast<int>(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out.results[i] = fn(i);
      } catch (...) {
        out.errors[i] = std::current_exception();
      }
    }
  };

  if (jobs == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return out;
}

}  // namespace saber
