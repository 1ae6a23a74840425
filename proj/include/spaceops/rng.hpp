#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace spaceops
{

    // std::mt19937_64 is bit-specified by the standard; the standard
    // distributions are not, so the helpers below are used instead.
    using Rng = std::mt19937_64;

    /// Uniform double in [0, 1) from the top 53 bits.
    inline double uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

    inline double uniform(Rng &rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

    /// Unbiased integer in [0, bound) by rejection sampling.
    inline std::uint64_t uniform_below(Rng &rng, std::uint64_t bound)
    {
        if (bound <= 1)
        {
            return 0;
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = rng();
        while (x >= limit)
        {
            x = rng();
        }
        return x % bound;
    }

    /// Fisher-Yates permutation of 0..n-1.
    inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed)
    {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            order[i] = i;
        }
        Rng rng(seed);
        for (std::size_t i = n; i > 1; --i)
        {
            const auto j = static_cast<std::size_t>(uniform_below(rng, i));
            std::swap(order[i - 1], order[j]);
        }
        return order;
    }

} // namespace spaceops
