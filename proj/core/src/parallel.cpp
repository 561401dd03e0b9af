#include "qstomo/parallel.hpp"

#include <cstdlib>
#include <string>

#include "qstomo/errors.hpp"

namespace qstomo {

int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QS_TOMO_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("QS_TOMO_JOBS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex mu;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += jobs) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace qstomo
