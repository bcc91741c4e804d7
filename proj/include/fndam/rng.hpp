#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fndam {

/// Seedable generator whose draws are reproducible across standard libraries.
///
/// std::mt19937_64 is bit-exact by definition; the distributions on top of it
/// are spelled out here instead of using the implementation-defined
/// std::*_distribution classes. `draws` counts raw 64-bit outputs so a saved
/// generator can be restored exactly.
class Rng {
public:
    static constexpr const char* algorithm = "mt19937_64/u53/box-muller-v1";

    explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

    static Rng restore(std::uint64_t seed, std::uint64_t draws) {
        Rng r(seed);
        r.engine_.discard(draws);
        r.draws_ = draws;
        return r;
    }

    std::uint64_t next_u64() {
        ++draws_;
        return engine_();
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
    }

    /// Standard normal via Box-Muller (cosine branch only; two raw draws each).
    double gaussian() {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t draws() const noexcept { return draws_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_ = 0;
    std::uint64_t draws_ = 0;
};

/// Fisher-Yates shuffle driven by Rng, so orderings are portable too.
template <typename Vec>
void shuffle(Vec& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.index(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace fndam
