#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cats {

/// Minimal persistent worker pool for the engine's data-parallel phases.
/// With fewer than two threads requested, run() degenerates to a serial
/// loop with zero synchronization cost. Work items are indexed jobs; the
/// caller guarantees jobs touch disjoint data, so results cannot depend on
/// scheduling and parallel output is identical to serial output.
class ThreadPool {
 public:
  explicit ThreadPool(int threads) {
    int workers = threads - 1;  // the calling thread participates too
    for (int i = 0; i < workers; ++i)
      workers_.emplace_back([this] { worker_loop(); });
  }

  ~ThreadPool() {
    {
      std::unique_lock lock(mutex_);
      stop_ = true;
    }
    start_cv_.notify_all();
    for (std::thread& t : workers_) t.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int parallelism() const { return static_cast<int>(workers_.size()) + 1; }

  void run(int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 0) return;
    if (workers_.empty() || jobs == 1) {
      for (int i = 0; i < jobs; ++i) fn(i);
      return;
    }
    {
      std::unique_lock lock(mutex_);
      fn_ = &fn;
      jobs_ = jobs;
      next_.store(0, std::memory_order_relaxed);
      pending_ = jobs;
      ++generation_;
    }
    start_cv_.notify_all();
    drain();
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    fn_ = nullptr;
  }

 private:
  void drain() {
    while (true) {
      int i = next_.fetch_add(1, std::memory_order_relaxed);
      if (i >= jobs_) return;
      (*fn_)(i);
      std::unique_lock lock(mutex_);
      if (--pending_ == 0) done_cv_.notify_all();
    }
  }

  void worker_loop() {
    std::uint64_t seen = 0;
    while (true) {
      {
        std::unique_lock lock(mutex_);
        start_cv_.wait(lock, [this, seen] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      drain();
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* fn_ = nullptr;
  std::atomic<int> next_{0};
  int jobs_ = 0;
  int pending_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace cats
