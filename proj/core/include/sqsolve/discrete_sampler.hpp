#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sqsolve/random_stream.hpp"

namespace sqsolve {

// =============================================================================
/// Inverse-CDF sampler over a fixed set of nonnegative weights.
///
/// Holds the prefix sums of the weights; a draw is one uniform variate and a
/// binary search, O(log n). Zero-weight outcomes have probability exactly
/// zero and are never returned.
///
class DiscreteSampler {
public:
    DiscreteSampler() = default;

    /// Throws InvalidInput if any weight is negative or non-finite, or if
    /// the weights sum to zero.
    explicit DiscreteSampler(std::span<const double> weights);

    std::size_t size() const noexcept { return cdf_.size(); }
    bool empty() const noexcept { return cdf_.empty(); }

    double total() const noexcept { return cdf_.empty() ? 0.0 : cdf_.back(); }

    /// Probability of outcome i (weight / total).
    double probability(std::size_t i) const;

    std::span<const double> cdf() const noexcept { return cdf_; }

    std::size_t draw(RandomStream& rng) const;

private:
    std::vector<double> cdf_;
    std::size_t last_positive_ = 0;
};

} // namespace sqsolve
