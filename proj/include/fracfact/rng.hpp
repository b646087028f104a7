#ifndef FRACFACT_RNG_HPP
#define FRACFACT_RNG_HPP

#include <cstdint>

namespace fracfact {

/// xoshiro256++ (Blackman & Vigna), seeded through splitmix64. Fixed
/// algorithm, so seeded streams are bit-identical across platforms.
/// Parallel chains split streams with long_jump(): stream s starts at the
/// seed state advanced by s long-jumps (each 2^192 steps apart).
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : s_) {
            // splitmix64
            x += 0x9e3779b97f4a7c15ull;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            word = z ^ (z >> 31);
        }
    }

    static Xoshiro256pp for_stream(std::uint64_t seed, unsigned stream) {
        Xoshiro256pp rng(seed);
        for (unsigned i = 0; i < stream; ++i)
            rng.long_jump();
        return rng;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0,1) with 53 random bits.
    double next_double() { return (next() >> 11) * 0x1.0p-53; }

    /// Uniform in [0,n) without modulo bias.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = -n % n;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold)
                return r % n;
        }
    }

    void long_jump() {
        static constexpr std::uint64_t jump[] = {0x76e15d3efefdcbbfull, 0xc5004e441c522fb3ull,
                                                 0x77710069854ee241ull, 0x39109bb02acbe635ull};
        std::uint64_t t[4] = {0, 0, 0, 0};
        for (std::uint64_t word : jump)
            for (int b = 0; b < 64; ++b) {
                if (word & (1ull << b))
                    for (int i = 0; i < 4; ++i)
                        t[i] ^= s_[i];
                next();
            }
        for (int i = 0; i < 4; ++i)
            s_[i] = t[i];
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace fracfact

#endif
