#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace msact {

// Fixed-size worker pool. Used only for embarrassingly parallel maps
// (batch samples, eval episodes); each task is internally single-threaded,
// so results do not depend on scheduling order.
class ThreadPool {
 public:
  explicit ThreadPool(int num_threads) {
    if (num_threads < 1) num_threads = 1;
    for (int i = 0; i < num_threads; ++i) {
      workers_.emplace_back([this] { worker_loop(); });
    }
  }

  ~ThreadPool() {
    {
      std::unique_lock<std::mutex> lock(m_);
      done_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const { return static_cast<int>(workers_.size()); }

  // Runs fn(i) for i in [0, n) and blocks until all complete. Exceptions
  // from tasks are rethrown on the calling thread (first one wins).
  void parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (size() == 1 || n == 1) {
      for (int i = 0; i < n; ++i) fn(i);
      return;
    }
    std::atomic<int> next{0};
    std::atomic<int> remaining{n};
    std::exception_ptr err;
    std::mutex err_m;
    std::condition_variable done_cv;
    std::mutex done_m;

    auto body = [&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lg(err_m);
          if (!err) err = std::current_exception();
        }
        if (remaining.fetch_sub(1) == 1) {
          std::lock_guard<std::mutex> lg(done_m);
          done_cv.notify_all();
        }
      }
    };

    {
      std::unique_lock<std::mutex> lock(m_);
      for (int t = 0; t < size(); ++t) tasks_.push(body);
    }
    cv_.notify_all();
    body();  // caller participates
    {
      std::unique_lock<std::mutex> lock(done_m);
      done_cv.wait(lock, [&] { return remaining.load() <= 0; });
    }
    if (err) std::rethrow_exception(err);
  }

  // Process-wide pool sized from MSACT_THREADS or hardware concurrency.
  static ThreadPool& global();

 private:
  void worker_loop() {
    for (;;) {
      std::function<void()> task;
      {
        std::unique_lock<std::mutex> lock(m_);
        cv_.wait(lock, [this] { return done_ || !tasks_.empty(); });
        if (done_ && tasks_.empty()) return;
        task = std::move(tasks_.front());
        tasks_.pop();
      }
      task();
    }
  }

  std::vector<std::thread> workers_;
  std::queue<std::function<void()>> tasks_;
  std::mutex m_;
  std::condition_variable cv_;
  bool done_ = false;
};

inline ThreadPool& ThreadPool::global() {
  static ThreadPool pool([] {
    if (const char* env = std::getenv("MSACT_THREADS")) {
      int n = std::atoi(env);
      if (n > 0) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 2;
  }());
  return pool;
}

}  // namespace msact
