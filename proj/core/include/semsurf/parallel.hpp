// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <span>

namespace semsurf {

/// Environment variable overriding the worker count.
inline constexpr const char* kThreadsEnvVar = "SEMSURF_THREADS";

/// Current worker count. Defaults to SEMSURF_THREADS, else hardware concurrency.
int thread_count();

/// Overrides the worker count for subsequent calls; n <= 0 restores the default.
void set_thread_count(int n);

/// RAII override of the worker count.
class ScopedThreadCount {
 public:
  explicit ScopedThreadCount(int n);
  ~ScopedThreadCount();
  ScopedThreadCount(const ScopedThreadCount&) = delete;
  ScopedThreadCount& operator=(const ScopedThreadCount&) = delete;

 private:
  int previous_;
};

/// Splits [0, n) into contiguous chunks and runs body(begin, end) on each.
/// Callers must write results by index so output never depends on the schedule.
/// The first exception thrown by any chunk is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 1024);

/// Fixed-order pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

}  // namespace semsurf
