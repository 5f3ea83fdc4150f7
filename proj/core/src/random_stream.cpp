#include "sqsolve/random_stream.hpp"

#include <cassert>

namespace sqsolve {

std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed)
    : seed_(seed), engine_(mix_seed(seed))
{}

RandomStream RandomStream::split(std::uint64_t stream_id) const
{
    return RandomStream(mix_seed(seed_ ^ mix_seed(stream_id + 0x632be59bd9b4e019ULL)));
}

double RandomStream::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n)
{
    assert(n > 0);
    // reject the biased tail so every residue is equally likely
    const std::uint64_t limit = engine_type::max() - engine_type::max() % n;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

double RandomStream::normal()
{
    return normal_(engine_);
}

} // namespace sqsolve
