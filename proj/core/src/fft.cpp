#include "qstomo/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace qstomo::fft {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans are made in place on a scratch buffer and executed on caller memory with
// fftw_execute_dft, so FFTW_UNALIGNED keeps results independent of buffer alignment.
fftw_plan get_plan(int rank, int n, int sign) {
  thread_local std::map<std::tuple<int, int, int>, fftw_plan> cache;
  auto key = std::make_tuple(rank, n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::lock_guard<std::mutex> lock(planner_mutex());
  long total = rank == 2 ? static_cast<long>(n) * n : n;
  fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(total));
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = rank == 2 ? fftw_plan_dft_2d(n, n, buf, buf, sign, flags)
                             : fftw_plan_dft_1d(n, buf, buf, sign, flags);
  fftw_free(buf);
  cache.emplace(key, plan);
  return plan;
}

void run(int rank, int n, int sign, cplx* data) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(get_plan(rank, n, sign), p, p);
}

}  // namespace

void forward_2d(int n, cplx* data) { run(2, n, FFTW_FORWARD, data); }

void inverse_2d(int n, cplx* data) {
  run(2, n, FFTW_BACKWARD, data);
  const double s = 1.0 / (static_cast<double>(n) * n);
  for (long i = 0, e = static_cast<long>(n) * n; i < e; ++i) data[i] *= s;
}

void forward_1d(int n, cplx* data) { run(1, n, FFTW_FORWARD, data); }

void inverse_1d(int n, cplx* data) {
  run(1, n, FFTW_BACKWARD, data);
  const double s = 1.0 / n;
  for (int i = 0; i < n; ++i) data[i] *= s;
}

}  // namespace qstomo::fft
