#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace qstomo {

// Explicit request if positive, else QS_TOMO_JOBS, else 1.
int resolve_jobs(int requested);

// Runs compute(i) for i in [0, n) on up to `jobs` threads and calls emit(i, result) on the
// calling thread in increasing i, as soon as each prefix is complete. Output order never
// depends on the thread count. The first exception thrown by compute or emit is rethrown.
template <class R>
void ordered_map(int n, int jobs, const std::function<R(int)>& compute, const std::function<void(int, R&)>& emit) {
  if (n <= 0) return;
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) {
      R r = compute(i);
      emit(i, r);
    }
    return;
  }
  std::vector<std::optional<R>> slots(static_cast<size_t>(n));
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n || stop.load()) return;
      try {
        R r = compute(i);
        std::lock_guard<std::mutex> lk(mu);
        slots[static_cast<size_t>(i)].emplace(std::move(r));
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
        stop.store(true);
      }
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  int emitted = 0;
  try {
    while (emitted < n) {
      std::optional<R> r;
      {
        std::unique_lock<std::mutex> lk(mu);
        cv.wait(lk, [&] { return slots[static_cast<size_t>(emitted)].has_value() || err; });
        if (err) break;
        r = std::move(slots[static_cast<size_t>(emitted)]);
        slots[static_cast<size_t>(emitted)].reset();
      }
      emit(emitted, *r);
      ++emitted;
    }
  } catch (...) {
    std::lock_guard<std::mutex> lk(mu);
    if (!err) err = std::current_exception();
    stop.store(true);
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// Static partition of [0, n) over `jobs` threads; fn(i) must only write its own outputs.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace qstomo
