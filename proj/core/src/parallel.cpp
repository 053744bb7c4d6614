#include "nsfc/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace nsfc::par {

namespace {

unsigned default_threads() {
  if (const char* env = std::getenv("NSFC_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

std::atomic<unsigned> g_threads{0};

}  // namespace

void set_threads(unsigned n) { g_threads.store(n); }

unsigned threads() {
  unsigned n = g_threads.load();
  return n > 0 ? n : default_threads();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  unsigned nw = std::min<std::size_t>(threads(), n);
  if (nw <= 1) {
    body(0, n);
    return;
  }
  std::exception_ptr err;
  std::mutex err_mtx;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  std::size_t chunk = (n + nw - 1) / nw;
  for (unsigned w = 0; w < nw; ++w) {
    std::size_t lo = std::min(n, w * chunk);
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mtx);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double deterministic_sum(std::span<const double> v) {
  return deterministic_map_sum(v.size(), [&](std::size_t i) { return v[i]; });
}

double deterministic_map_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
  if (n == 0) return 0.0;
  std::size_t nchunks = (n + reduce_chunk - 1) / reduce_chunk;
  std::vector<double> partial(nchunks);
  parallel_for(nchunks, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> buf(reduce_chunk);
    for (std::size_t c = lo; c < hi; ++c) {
      std::size_t b = c * reduce_chunk;
      std::size_t e = std::min(n, b + reduce_chunk);
      for (std::size_t i = b; i < e; ++i) buf[i - b] = f(i);
      partial[c] = pairwise_sum(std::span<const double>(buf.data(), e - b));
    }
  });
  return pairwise_sum(partial);
}

namespace {

template <class Cmp>
double extremum(std::size_t n, const std::function<double(std::size_t)>& f, double init, Cmp cmp) {
  if (n == 0) return init;
  std::size_t nchunks = (n + reduce_chunk - 1) / reduce_chunk;
  std::vector<double> partial(nchunks, init);
  parallel_for(nchunks, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      std::size_t b = c * reduce_chunk;
      std::size_t e = std::min(n, b + reduce_chunk);
      double m = init;
      for (std::size_t i = b; i < e; ++i) {
        double x = f(i);
        if (cmp(x, m)) m = x;
      }
      partial[c] = m;
    }
  });
  double m = init;
  for (double x : partial)
    if (cmp(x, m)) m = x;
  return m;
}

}  // namespace

double deterministic_max(std::size_t n, const std::function<double(std::size_t)>& f) {
  return extremum(n, f, -std::numeric_limits<double>::infinity(), std::greater<double>());
}

double deterministic_min(std::size_t n, const std::function<double(std::size_t)>& f) {
  return extremum(n, f, std::numeric_limits<double>::infinity(), std::less<double>());
}

}  // namespace nsfc::par
