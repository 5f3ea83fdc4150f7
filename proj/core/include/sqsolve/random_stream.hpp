#pragma once

#include <cstdint>
#include <random>

namespace sqsolve {

// =============================================================================
/// Seeded source of uniform randomness. Every randomized operation in the
/// library takes one of these by reference and advances it; nothing reads a
/// global generator.
///
/// Streams are splittable: `split(i)` derives an independent child stream
/// from this stream's seed and a stream id without advancing the parent, so
/// parallel work can be keyed by (seed, index) and stays reproducible
/// regardless of scheduling.
///
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed);

    /// Child stream keyed by `stream_id`. Does not advance this stream.
    RandomStream split(std::uint64_t stream_id) const;

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Standard normal draw.
    double normal();

    engine_type& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer, used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

} // namespace sqsolve
