#include "sqsolve/discrete_sampler.hpp"

#include <algorithm>
#include <cmath>

#include "sqsolve/errors.hpp"

namespace sqsolve {

DiscreteSampler::DiscreteSampler(std::span<const double> weights)
{
    cdf_.reserve(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        if (!std::isfinite(w) || w < 0.0) {
            throw InvalidInput("sampler weights must be finite and nonnegative");
        }
        acc += w;
        if (w > 0.0) last_positive_ = i;
        cdf_.push_back(acc);
    }
    if (!(acc > 0.0)) {
        throw InvalidInput("sampler weights sum to zero; no distribution exists");
    }
}

double DiscreteSampler::probability(std::size_t i) const
{
    const double prev = i == 0 ? 0.0 : cdf_[i - 1];
    return (cdf_[i] - prev) / cdf_.back();
}

std::size_t DiscreteSampler::draw(RandomStream& rng) const
{
    const double u = rng.uniform() * cdf_.back();
    // first i with cdf[i] > u; zero-weight slots share their predecessor's
    // cdf value and so can never satisfy this
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return last_positive_;
    return static_cast<std::size_t>(it - cdf_.begin());
}

} // namespace sqsolve
