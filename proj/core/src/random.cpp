#include "axgen/random.hpp"

namespace axgen {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return Rng(mix64(mix64(mix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL)));
}

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection sampling on the largest multiple of n.
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n + 1) % n;
    std::uint64_t r = engine_();
    while (r > limit) r = engine_();
    return r % n;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());
    return lo + static_cast<std::int64_t>(below(span));
}

double Rng::unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

}  // namespace axgen
