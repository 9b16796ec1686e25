#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace axgen {

/// Seeded random stream with platform-independent derived distributions.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not, so bounded integers and
/// unit reals are drawn here with explicit algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for (seed, a, b), e.g. (run seed, generation, slot).
    static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);

    /// Uniform real in [0, 1) with 53 random bits.
    double unit();

    bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && unit() < p); }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace axgen
