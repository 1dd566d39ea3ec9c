#pragma once

#include <cstdint>
#include <random>

namespace lmoa {

// Deterministic random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; all derived quantities (uniform reals,
// bounded integers) are computed here rather than through the
// implementation-defined std:: distributions, so draws are identical across
// standard libraries.
//
// Streams: `Rng(seed).stream(k)` yields an independent generator whose seed
// is a SplitMix64 mix of (seed, k). Streams never advance their parent.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    Rng stream(std::uint64_t id) const { return Rng(mix(seed_ ^ mix(id + 0x632be59bd9b4e019ULL))); }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    static constexpr std::uint64_t mix(std::uint64_t z)
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace lmoa
