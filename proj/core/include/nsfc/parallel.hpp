#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nsfc::par {

// Worker count used by parallel_for. 0 restores the automatic choice
// (NSFC_THREADS if set, hardware concurrency otherwise).
void set_threads(unsigned n);
unsigned threads();

// Static partition of [0, n) into contiguous ranges, one per worker.
// Exceptions thrown by body are captured and rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Reduction tree shape is fixed by the data length alone: values are summed
// pairwise inside chunks of reduce_chunk, chunk partials are combined
// pairwise in index order. Worker count never changes the result bits.
inline constexpr std::size_t reduce_chunk = 4096;

double pairwise_sum(std::span<const double> v);
double deterministic_sum(std::span<const double> v);

// Fused map + deterministic sum over i in [0, n).
double deterministic_map_sum(std::size_t n, const std::function<double(std::size_t)>& f);

double deterministic_max(std::size_t n, const std::function<double(std::size_t)>& f);
double deterministic_min(std::size_t n, const std::function<double(std::size_t)>& f);

}  // namespace nsfc::par
