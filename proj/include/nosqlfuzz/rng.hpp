#pragma once

#include <cstdint>
#include <string>

namespace nosqlfuzz {

/// Seeded pseudo-random source. All randomness in a run flows through
/// instances of this class so runs are reproducible from a single seed.
/// Bounded draws are derived from raw 64-bit outputs by hand instead of
/// <random> distributions, which are not portable across standard
/// library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Uniform in [lo, hi] inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniform in [0, 1).
    double real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// True with probability p.
    bool chance(double p) { return real() < p; }

    template <typename Container>
    const typename Container::value_type& pick(const Container& c) {
        return c[below(c.size())];
    }

    /// Derive an independent stream, e.g. one per subsystem.
    Rng fork() { return Rng(next_u64()); }

private:
    std::uint64_t state_;
};

/// 24 lowercase hex characters derived from (seed, counter); used for
/// synthetic document ids.
std::string synthetic_hex24(std::uint64_t seed, std::uint64_t counter);

}  // namespace nosqlfuzz
