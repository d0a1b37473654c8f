// Seeded, splittable PRNG for reproducible simulation runs.
//
// SplitMix64 core: the output sequence depends only on the 64-bit seed,
// not on the platform, standard library, or compiler. std::* distributions
// are deliberately avoided because their draw sequences are unspecified.

#ifndef AVALANCHE_RNG_HPP
#define AVALANCHE_RNG_HPP

#include <cstdint>

namespace avalanche {

class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Next raw 64-bit draw (SplitMix64).
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Lemire multiply-shift; n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + next_double() * (hi - lo);
    }

    /// Derive an independent stream from this stream's seed and a stream id.
    /// Forking does not advance this stream's state.
    RngStream fork(std::uint64_t stream_id) const {
        std::uint64_t z = seed_ ^ (0xD1B54A32D192ED03ULL * (stream_id + 1));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return RngStream(z ^ (z >> 31));
    }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace avalanche

#endif  // AVALANCHE_RNG_HPP
