#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mfn {

// Work is always split into fixed chunks whose boundaries depend only on the
// problem size, never on the worker count; per-chunk results are merged in
// chunk order. That is the determinism contract every engine relies on.
inline constexpr int kChunkSize = 64;

class ThreadPool {
 public:
  static ThreadPool& instance() {
    static ThreadPool pool;
    return pool;
  }

  // 0 means "all hardware threads". Takes effect for subsequent calls.
  void set_cap(int cap) {
    std::lock_guard<std::mutex> lk(api_mutex_);
    cap_ = cap;
  }
  int cap() const { return cap_; }

  int effective_workers() const {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    const int cap = cap_.load();
    return (cap > 0 && cap < hw) ? cap : hw;
  }

  // Runs fn(chunk_begin, chunk_end) over [0,n) in kChunkSize chunks. Chunks
  // may execute on any worker; fn must only write chunk-local state.
  void for_chunks(int n, const std::function<void(int, int)>& fn) {
    if (n <= 0) return;
    const int workers = effective_workers();
    const int num_chunks = (n + kChunkSize - 1) / kChunkSize;
    if (workers == 1 || num_chunks == 1) {
      for (int c = 0; c < num_chunks; ++c)
        fn(c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
      return;
    }
    std::lock_guard<std::mutex> lk(api_mutex_);
    std::atomic<int> next{0};
    auto worker = [&]() {
      int c;
      while ((c = next.fetch_add(1)) < num_chunks)
        fn(c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(workers) - 1);
    for (int i = 1; i < workers; ++i) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
  }

 private:
  ThreadPool() = default;
  std::mutex api_mutex_;
  std::atomic<int> cap_{0};
};

inline void parallel_for(int n, const std::function<void(int)>& fn) {
  ThreadPool::instance().for_chunks(n, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) fn(i);
  });
}

inline void parallel_for_chunks(int n, const std::function<void(int, int)>& fn) {
  ThreadPool::instance().for_chunks(n, fn);
}

inline int num_chunks(int n) { return (n + kChunkSize - 1) / kChunkSize; }
inline int chunk_of(int i) { return i / kChunkSize; }

}  // namespace mfn
