#pragma once
/// @file parallel.hpp
/// Minimal fork-join helpers with deterministic reductions.

#include <cstddef>
#include <functional>
#include <vector>

namespace martenscale {

/// Worker count used when a call passes threads = 0.  Defaults to the
/// available hardware parallelism.
void set_default_threads(unsigned n);
unsigned default_threads();

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = default).
/// Exceptions are rethrown on the calling thread (first by index).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

/// Pairwise (tree) summation; the result depends only on the order of `v`.
double pairwise_sum(const double* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace martenscale
