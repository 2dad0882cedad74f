#pragma once

#include <cstdint>
#include <random>

#include "bz/bigint.hpp"

namespace bz {

namespace detail {

// splitmix64 step; used to whiten seeds and derive per-worker streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Seedable deterministic 64-bit generator. The core engine is mt19937_64,
// whose output sequence is pinned by the C++ standard; all derived draws
// (unit reals, bounded integers) are implemented here rather than through
// std distributions, so a given seed produces the same stream on every
// platform this library builds on. Stability of the mapping from seed to
// stream is part of the released interface.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed) {
        std::uint64_t s = seed;
        eng_.seed(detail::splitmix64(s));
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform real in [0,1) with 53 random bits.
    double unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        // masked rejection: unbiased, expected < 2 engine calls
        std::uint64_t mask = ~0ULL;
        if (bound > 1) {
            unsigned bits = 64 - static_cast<unsigned>(__builtin_clzll(bound - 1));
            mask = (bits == 64) ? ~0ULL : ((1ULL << bits) - 1);
        } else {
            return 0;
        }
        for (;;) {
            std::uint64_t v = next_u64() & mask;
            if (v < bound) return v;
        }
    }

    // Uniform BigInt in [0, bound); used where weights exceed 2^64
    // (backward-DP word sampling with exact counts).
    BigInt below_big(const BigInt& bound) {
        if (bound <= 1) return 0;
        unsigned bits = boost::multiprecision::msb(bound) + 1;
        unsigned words = (bits + 63) / 64;
        for (;;) {
            BigInt v = 0;
            for (unsigned i = 0; i < words; ++i) {
                v <<= 64;
                v |= BigInt(next_u64());
            }
            v >>= (words * 64 - bits);
            if (v < bound) return v;
        }
    }

    // Independent stream for worker `index`, derived from this source's
    // seed only (not its current state), so partitioned runs are
    // reproducible from the master seed alone.
    RandomSource derive(std::uint64_t index) const {
        std::uint64_t s = seed_ ^ (0x5851f42d4c957f2dULL * (index + 1));
        std::uint64_t mixed = detail::splitmix64(s);
        return RandomSource(mixed);
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

} // namespace bz
