#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

#include <omp.h>

namespace permcast::parallel {

inline int default_concurrency() { return omp_get_num_procs(); }

/// Serial reference: out[t] = fn(t) in index order.
template <class T, class Fn>
std::vector<T> map_indices_serial(std::size_t count, Fn&& fn) {
  std::vector<T> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) out.push_back(fn(t));
  return out;
}

/// OpenMP version of map_indices_serial. Each slot is written by exactly one
/// iteration, so the result does not depend on scheduling. The first exception
/// thrown by any iteration is rethrown after the loop.
template <class T, class Fn>
std::vector<T> map_indices(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 2) return map_indices_serial<T>(count, fn);
  std::vector<T> out(count);
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (long long t = 0; t < n; ++t) {
    try {
      out[static_cast<std::size_t>(t)] = fn(static_cast<std::size_t>(t));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace permcast::parallel
