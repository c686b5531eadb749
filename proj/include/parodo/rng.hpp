#pragma once

#include <cstdint>

namespace parodo {

/// Deterministic 64-bit generator (splitmix64). Chosen over std::mt19937 so
/// that streams are byte-identical across platforms and standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n), unbiased via rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t threshold = (0ull - n) % n;
        for (;;) {
            const std::uint64_t x = next();
            if (x >= threshold) return x % n;
        }
    }

    bool next_bit() { return (next() >> 63) != 0; }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

private:
    std::uint64_t state_;
};

/// Independent stream for (seed, shard): shard index is mixed through the
/// generator itself so neighboring shards share no state arithmetic.
inline SplitMix64 make_stream(std::uint64_t seed, std::uint64_t shard) {
    SplitMix64 mixer(seed ^ (0xA3EC647659359ACDull * (shard + 1)));
    return SplitMix64(mixer.next());
}

} // namespace parodo
