#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fracmvp {

/// Worker count: FRAC_THREADS if set and positive, else the hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("FRAC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Running mean/variance (Welford), mergeable with Chan's formula.
struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
    const double d = o.mean - mean;
    const double n = na + nb;
    mean += d * nb / n;
    m2 += o.m2 + d * d * na * nb / n;
    count += o.count;
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stderr_of_mean() const {
    return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

inline constexpr std::int64_t kBlockSize = 1024;

namespace detail {
// Runs `worker` on nt threads; the first exception thrown by any worker is rethrown here.
template <class W>
void run_pool(unsigned nt, W&& worker) {
  std::exception_ptr err;
  std::mutex mu;
  auto guarded = [&] {
    try {
      worker();
    } catch (...) {
      std::lock_guard lock(mu);
      if (!err) err = std::current_exception();
    }
  };
  if (nt <= 1) {
    guarded();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(guarded);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
}
}  // namespace detail

/// Runs body(begin, end, acc) over fixed blocks of [0, n) on a thread pool and folds the
/// per-block accumulators in block order. Acc must provide merge(const Acc&). Because block
/// boundaries and the fold order do not depend on the thread count, results are bit-identical
/// for any FRAC_THREADS.
template <class Acc, class Body>
Acc parallel_blocks(std::int64_t n, Body&& body) {
  const std::int64_t nblocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<Acc> partial(static_cast<std::size_t>(std::max<std::int64_t>(nblocks, 0)));
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      const std::int64_t lo = b * kBlockSize;
      body(lo, std::min(n, lo + kBlockSize), partial[static_cast<std::size_t>(b)]);
    }
  };
  const unsigned nt = static_cast<unsigned>(
      std::min<std::int64_t>(thread_count(), std::max<std::int64_t>(nblocks, 1)));
  detail::run_pool(nt, worker);
  Acc total{};
  for (const auto& p : partial) total.merge(p);
  return total;
}

/// Parallel map over indices; out[i] = f(i). Deterministic since each slot is written once.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f) {
  std::vector<T> out(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      out[i] = f(i);
    }
  };
  const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(thread_count(), std::max<std::size_t>(n, 1)));
  detail::run_pool(nt, worker);
  return out;
}

}  // namespace fracmvp
