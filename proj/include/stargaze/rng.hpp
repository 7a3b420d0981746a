#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "stargaze/error.hpp"

namespace stargaze {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic pseudo-random generator (xoshiro256++ seeded via splitmix64).
///
/// Standard-library distributions are implementation-defined, so every draw
/// is hand-rolled here: a fixed seed produces the same stream on every
/// toolchain. All stochastic operations in the library take either an
/// explicit seed or an Rng; there is no global generator.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    /// Independent substream identified by (seed, stream): used to hand each
    /// tree / epoch / graph its own generator without sharing state.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
        return Rng(detail::splitmix64(sm));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform index in [0, bound). bound must be positive.
    std::size_t uniform_index(std::size_t bound) {
        if (bound == 0) throw Error("Rng::uniform_index: bound must be positive");
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform_real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

    /// Standard normal via Box-Muller (one spare value cached).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - uniform_real();  // (0, 1], keeps the log finite
        double u2 = uniform_real();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /// Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace stargaze
