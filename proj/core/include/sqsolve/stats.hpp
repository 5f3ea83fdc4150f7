#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sqsolve::stats {

/// Linearly interpolated sample quantile (the "type 7" rule: position
/// q * (n - 1) in the sorted sample). NaNs are dropped first; returns NaN
/// for an empty sample.
double quantile(std::vector<double> sample, double q);

inline double median(std::vector<double> sample) { return quantile(std::move(sample), 0.5); }

/// Empirical distribution of index counts.
std::vector<double> frequencies(std::span<const std::size_t> counts);

/// 0.5 * sum |p_i - q_i|
double total_variation(std::span<const double> p, std::span<const double> q);

/// Worker count for parallel trials: SQSOLVE_THREADS if set and positive,
/// else the hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Results must
/// be written to per-index slots; scheduling order is unspecified. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

} // namespace sqsolve::stats
